use rand::Rng;

use super::SystemConfig;
use crate::linalg::{complex_normal_mat, complex_normal_vec, random_phase};
use crate::{CMat, CVec, Error, Result, C64};

/// Tolerance on `|θ_n| = 1`.
pub const UNIT_MODULUS_TOL: f64 = 1e-9;

/// Per-element reflection phases `θ` plus the homogenizing scalar `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShifts {
    theta: CVec,
    t: C64,
}

impl PhaseShifts {
    pub fn new(theta: CVec) -> Result<Self> {
        for (index, v) in theta.iter().enumerate() {
            let modulus = v.norm();
            if !((modulus - 1.0).abs() <= UNIT_MODULUS_TOL) {
                return Err(Error::NonUnitModulus { index, modulus });
            }
        }
        Ok(Self {
            theta,
            t: C64::new(1.0, 0.0),
        })
    }

    /// Homogenized form; both `θ` and `t` must be unit modulus.
    pub fn with_auxiliary(theta: CVec, t: C64) -> Result<Self> {
        let mut out = Self::new(theta)?;
        let modulus = t.norm();
        if (modulus - 1.0).abs() > UNIT_MODULUS_TOL {
            return Err(Error::NonUnitModulus {
                index: out.theta.len(),
                modulus,
            });
        }
        out.t = t;
        Ok(out)
    }

    pub fn from_angles(angles: &[f64]) -> Self {
        Self {
            theta: CVec::from_iterator(angles.len(), angles.iter().map(|&a| C64::from_polar(1.0, a))),
            t: C64::new(1.0, 0.0),
        }
    }

    /// Uniform i.i.d. phases on [0, 2π).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            theta: CVec::from_fn(n, |_, _| random_phase(rng)),
            t: C64::new(1.0, 0.0),
        }
    }

    pub fn all_zero_phase(n: usize) -> Self {
        Self::from_angles(&vec![0.0; n])
    }

    pub fn theta(&self) -> &CVec {
        &self.theta
    }

    pub fn t(&self) -> C64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// `θ̄ = [θ; t]`.
    pub fn theta_bar(&self) -> CVec {
        let n = self.theta.len();
        CVec::from_fn(n + 1, |i, _| if i < n { self.theta[i] } else { self.t })
    }

    pub fn angles(&self) -> Vec<f64> {
        self.theta.iter().map(|v| v.arg()).collect()
    }
}

/// Channel triple of one block plus the effective coefficient matrix once
/// phases are fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    /// LIS → receiver, `M × N`.
    pub g: CMat,
    /// User → LIS, length `N`.
    pub h_r: CVec,
    /// User → receiver, length `M`.
    pub h_d: CVec,
    a: Option<CMat>,
}

impl ChannelState {
    pub fn new(g: CMat, h_r: CVec, h_d: CVec) -> Result<Self> {
        if g.ncols() != h_r.len() {
            return Err(Error::DimensionMismatch {
                what: "h_r length vs G columns",
                expected: g.ncols(),
                got: h_r.len(),
            });
        }
        if g.nrows() != h_d.len() {
            return Err(Error::DimensionMismatch {
                what: "h_d length vs G rows",
                expected: g.nrows(),
                got: h_d.len(),
            });
        }
        let finite = |m: &[C64]| m.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        if !(finite(g.as_slice()) && finite(h_r.as_slice()) && finite(h_d.as_slice())) {
            return Err(Error::InvalidConfig("channel entries must be finite".into()));
        }
        Ok(Self { g, h_r, h_d, a: None })
    }

    pub fn m(&self) -> usize {
        self.g.nrows()
    }

    pub fn n(&self) -> usize {
        self.g.ncols()
    }

    /// `D_h = diag(h_r)`.
    pub fn d_h(&self) -> CMat {
        CMat::from_diagonal(&self.h_r)
    }

    /// `β G D_h`, i.e. the coefficient matrix before the phases are applied.
    pub fn cascade(&self, beta: f64) -> CMat {
        let mut b = self.g.scale(beta);
        for (j, h) in self.h_r.iter().enumerate() {
            for v in b.column_mut(j).iter_mut() {
                *v *= h;
            }
        }
        b
    }

    /// `A = β G Θ D_h` for the given phases.
    pub fn coefficient_matrix(&self, phases: &PhaseShifts, beta: f64) -> Result<CMat> {
        if phases.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "phase vector length",
                expected: self.n(),
                got: phases.len(),
            });
        }
        let mut a = self.cascade(beta);
        for (j, th) in phases.theta().iter().enumerate() {
            for v in a.column_mut(j).iter_mut() {
                *v *= th;
            }
        }
        Ok(a)
    }

    /// Fix the phases and cache `A`.
    pub fn set_phases(&mut self, phases: &PhaseShifts, beta: f64) -> Result<()> {
        self.a = Some(self.coefficient_matrix(phases, beta)?);
        Ok(())
    }

    pub fn with_phases(mut self, phases: &PhaseShifts, beta: f64) -> Result<Self> {
        self.set_phases(phases, beta)?;
        Ok(self)
    }

    /// Cached `A`, if phases have been applied.
    pub fn a(&self) -> Option<&CMat> {
        self.a.as_ref()
    }
}

/// I.i.d. CN(0, 1) entries for `G`, `h_r`, `h_d`. Draw order: `G` row-major,
/// then `h_r`, then `h_d`.
pub fn sample_channels<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> ChannelState {
    let g = complex_normal_mat(rng, cfg.m, cfg.n, 1.0);
    let h_r = complex_normal_vec(rng, cfg.n, 1.0);
    let h_d = complex_normal_vec(rng, cfg.m, 1.0);
    ChannelState::new(g, h_r, h_d).expect("sampled shapes agree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_channels() {
        let cfg = SystemConfig::new(1, 1, 2, 0.5, 0.5, 1.0, 1.0).unwrap();
        let a = sample_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(11));
        let b = sample_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn reference_shapes() {
        let cfg = SystemConfig::reference_setup(0.0);
        let ch = sample_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(ch.g.shape(), (32, 32));
        assert_eq!(ch.h_r.len(), 32);
        assert_eq!(ch.h_d.len(), 32);
        assert!(ch.a().is_none());
        let dh = ch.d_h();
        for i in 0..32 {
            assert_eq!(dh[(i, i)], ch.h_r[i]);
        }
    }

    #[test]
    fn direct_link_power_concentrates() {
        // |h_d,m|² ~ Exp(1): mean 1, sd 1, so 3σ over M draws is 3/√M
        let m = 1000;
        let cfg = SystemConfig::new(m, 1, 2, 0.5, 0.5, 1.0, 1.0).unwrap();
        let ch = sample_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let mean = ch.h_d.iter().map(|v| v.norm_sqr()).sum::<f64>() / m as f64;
        assert!((mean - 1.0).abs() < 3.0 / (m as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn coefficient_matrix_matches_product_form() {
        let cfg = SystemConfig::new(3, 4, 2, 0.7, 0.5, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = sample_channels(&cfg, &mut rng);
        let ph = PhaseShifts::random(4, &mut rng);
        let a = ch.coefficient_matrix(&ph, 0.7).unwrap();
        let direct = ch.g.scale(0.7) * CMat::from_diagonal(ph.theta()) * ch.d_h();
        assert!((a - direct).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_unit_phase() {
        let v = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0)]);
        assert!(matches!(
            PhaseShifts::new(v),
            Err(Error::NonUnitModulus { index: 1, .. })
        ));
    }
}
