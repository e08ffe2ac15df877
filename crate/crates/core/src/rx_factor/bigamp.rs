//! Rank-1 bilinear generalized AMP for `Y = z xᵀ + W`.
//!
//! `z` has an independent complex Gaussian prior per antenna, `x` is uniform
//! over the constellation except slot 1 which is pinned to the known
//! reference symbol. The output channel is AWGN. Step sizes follow the
//! damped BiG-AMP recursion: the scaled residual `ŝ`, its variance, and the
//! estimates fed into the `r`/`q` updates are all smoothed with the current
//! step. The step is halved whenever the fit residual grows and grows
//! slowly (up to a cap) while it keeps shrinking.
//!
//! Starting `x̂` at the prior mean (zero for QPSK) makes the first
//! Onsager correction on `z` dominate at high SNR, so the default start is
//! the pilot-corrected leading singular vector of `Y`.

use rand::Rng;

use crate::linalg::{complex_normal, top_singular};
use crate::model::Constellation;
use crate::{CMat, CVec, Error, Result, C64};

/// Prior information available to the factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPriors {
    /// Mean of each `z_m`.
    pub z_mean: CVec,
    /// Variance of each `z_m`.
    pub z_var: Vec<f64>,
    pub constellation: Constellation,
    /// Known value of slot 1.
    pub reference_symbol: C64,
    /// Per-sample noise variance of `Y`.
    pub noise_var: f64,
}

impl FactorPriors {
    /// Gaussian approximation of `z = A s + h_d` for Bernoulli(ρ) states:
    /// mean `ρ a_mᴴ 1 + h_d,m`, variance `ρ(1-ρ) ‖a_m‖²` (`a_mᴴ` the m-th
    /// row of `A`).
    pub fn from_model(
        a: &CMat,
        h_d: &CVec,
        rho: f64,
        constellation: Constellation,
        reference_symbol: C64,
        noise_var: f64,
    ) -> Result<Self> {
        if a.nrows() != h_d.len() {
            return Err(Error::DimensionMismatch {
                what: "h_d length vs A rows",
                expected: a.nrows(),
                got: h_d.len(),
            });
        }
        let row_sum = a.column_sum();
        let z_mean = row_sum.scale(rho) + h_d;
        let z_var = a
            .row_iter()
            .map(|r| rho * (1.0 - rho) * r.norm_squared())
            .collect();
        Ok(Self {
            z_mean,
            z_var,
            constellation,
            reference_symbol,
            noise_var,
        })
    }
}

/// Starting point for `x̂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BigAmpInit {
    /// Prior mean plus a small random perturbation.
    PriorMean,
    /// One random draw from the prior per slot.
    PriorDraw,
    /// Pilot-corrected leading right singular vector of `Y`.
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigAmpOptions {
    pub init: BigAmpInit,
    pub max_iter: usize,
    /// Stop when `‖ẑx̂ᵀ − previous‖_F / ‖ẑx̂ᵀ‖_F` drops below this.
    pub tol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Step multiplier after an iteration that did not raise the residual.
    pub step_growth: f64,
    /// Scale of the random perturbation added to the initial `x̂`.
    pub init_perturbation: f64,
    /// Residual growth factor (over the initial residual) treated as
    /// divergence.
    pub divergence_factor: f64,
}

impl Default for BigAmpOptions {
    fn default() -> Self {
        Self {
            init: BigAmpInit::Spectral,
            max_iter: 200,
            tol: 1e-8,
            initial_step: 0.25,
            min_step: 0.01,
            max_step: 0.5,
            step_growth: 1.1,
            init_perturbation: 1e-2,
            divergence_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BigAmpOutput {
    pub z_hat: CVec,
    pub x_hat: CVec,
    pub iterations: usize,
    pub converged: bool,
    /// Residual exceeded `divergence_factor` times its initial value.
    pub diverged: bool,
    /// `‖Y − ẑx̂ᵀ‖_F` at the returned estimates.
    pub residual: f64,
}

/// Posterior mean/variance of a point uniform over `points` seen through
/// `r = x + CN(0, var)`.
fn discrete_posterior(points: &[C64], r: C64, var: f64, logw: &mut [f64]) -> (C64, f64) {
    let mut top = f64::NEG_INFINITY;
    for (w, c) in logw.iter_mut().zip(points) {
        *w = -(c - r).norm_sqr() / var;
        top = top.max(*w);
    }
    let mut total = 0.0;
    let mut mean = C64::new(0.0, 0.0);
    let mut second = 0.0;
    for (w, c) in logw.iter_mut().zip(points) {
        let p = (*w - top).exp();
        *w = p;
        total += p;
        mean += c * p;
        second += c.norm_sqr() * p;
    }
    mean /= total;
    let v = (second / total - mean.norm_sqr()).max(0.0);
    (mean, v)
}

fn spectral_start(y: &CMat, reference: C64) -> Vec<C64> {
    let (_, _, v, _) = top_singular(y);
    let pilot = v[0].conj();
    let gamma = if pilot.norm() > 1e-12 { reference / pilot } else { C64::new(1.0, 0.0) };
    v.iter().map(|c| c.conj() * gamma).collect()
}

fn residual_norm(y: &CMat, z: &[C64], x: &[C64]) -> f64 {
    let m = z.len();
    let mut acc = 0.0;
    for (l, xl) in x.iter().enumerate() {
        let col = &y.as_slice()[l * m..(l + 1) * m];
        for (yv, zv) in col.iter().zip(z) {
            acc += (yv - zv * xl).norm_sqr();
        }
    }
    acc.sqrt()
}

pub fn factor_bigamp<R: Rng + ?Sized>(
    y: &CMat,
    priors: &FactorPriors,
    opts: &BigAmpOptions,
    rng: &mut R,
) -> Result<BigAmpOutput> {
    let (m, l) = y.shape();
    if priors.z_mean.len() != m || priors.z_var.len() != m {
        return Err(Error::DimensionMismatch {
            what: "z prior length vs Y rows",
            expected: m,
            got: priors.z_mean.len(),
        });
    }
    if l == 0 {
        return Err(Error::DimensionMismatch {
            what: "Y columns",
            expected: 1,
            got: 0,
        });
    }
    let ys = y.as_slice();
    let energy = y.norm_squared() / (m * l) as f64;
    if energy == 0.0 {
        return Err(Error::ZeroObservation);
    }
    // noiseless blocks still need a positive output variance
    let noise = priors.noise_var.max(1e-10 * energy);
    let tiny = 1e-300;
    let points = priors.constellation.points();
    let prior_var_x = priors.constellation.average_power();
    let mut logw = vec![0.0; points.len()];

    // estimates
    let mut x_hat: Vec<C64> = match opts.init {
        BigAmpInit::PriorMean => (0..l)
            .map(|_| priors.constellation.points().iter().sum::<C64>() / points.len() as f64
                + complex_normal(rng, 1.0) * opts.init_perturbation)
            .collect(),
        BigAmpInit::PriorDraw => (0..l)
            .map(|_| points[rng.random_range(0..points.len())])
            .collect(),
        BigAmpInit::Spectral => spectral_start(y, priors.reference_symbol),
    };
    x_hat[0] = priors.reference_symbol;
    let mut x_var: Vec<f64> = (0..l).map(|i| if i == 0 { 0.0 } else { prior_var_x }).collect();
    let mut z_hat: Vec<C64> = priors.z_mean.iter().copied().collect();
    let mut z_var: Vec<f64> = priors.z_var.clone();

    // damped copies and message state
    let mut x_bar = x_hat.clone();
    let mut z_bar = z_hat.clone();
    let mut s_hat = vec![C64::new(0.0, 0.0); m * l];
    let mut s_var = vec![0.0; m * l];
    let mut p_var = vec![0.0; m * l];

    let mut product: Vec<C64> = vec![C64::new(0.0, 0.0); m * l];
    let fill_product = |prod: &mut [C64], z: &[C64], x: &[C64]| {
        for (j, xj) in x.iter().enumerate() {
            for (i, zi) in z.iter().enumerate() {
                prod[j * m + i] = zi * xj;
            }
        }
    };
    fill_product(&mut product, &z_hat, &x_hat);

    let initial_residual = residual_norm(y, &z_hat, &x_hat);
    let mut last_residual = initial_residual;
    let mut step = opts.initial_step;
    let mut iterations = 0;
    let mut converged = false;
    let mut diverged = false;

    let mut r_num = vec![C64::new(0.0, 0.0); l];
    let mut r_den = vec![0.0; l];
    let mut r_corr = vec![0.0; l];
    let mut q_num = vec![C64::new(0.0, 0.0); m];
    let mut q_den = vec![0.0; m];
    let mut q_corr = vec![0.0; m];

    while iterations < opts.max_iter {
        iterations += 1;

        // output side
        for j in 0..l {
            for i in 0..m {
                let k = j * m + i;
                let pbar_var = z_hat[i].norm_sqr() * x_var[j] + z_var[i] * x_hat[j].norm_sqr();
                let pv_new = pbar_var + z_var[i] * x_var[j];
                let pv = if iterations == 1 {
                    pv_new
                } else {
                    step * pv_new + (1.0 - step) * p_var[k]
                };
                p_var[k] = pv;
                let p_hat = z_hat[i] * x_hat[j] - s_hat[k] * pbar_var;
                let sv_new = 1.0 / (pv + noise);
                let sh_new = (ys[k] - p_hat) * sv_new;
                if iterations == 1 {
                    s_hat[k] = sh_new;
                    s_var[k] = sv_new;
                } else {
                    s_hat[k] = sh_new * step + s_hat[k] * (1.0 - step);
                    s_var[k] = step * sv_new + (1.0 - step) * s_var[k];
                }
            }
        }

        if iterations > 1 {
            for (b, h) in x_bar.iter_mut().zip(&x_hat) {
                *b = h * step + *b * (1.0 - step);
            }
            for (b, h) in z_bar.iter_mut().zip(&z_hat) {
                *b = h * step + *b * (1.0 - step);
            }
        }

        // input side sums
        r_num.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        r_den.iter_mut().for_each(|v| *v = 0.0);
        r_corr.iter_mut().for_each(|v| *v = 0.0);
        q_num.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        q_den.iter_mut().for_each(|v| *v = 0.0);
        q_corr.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..l {
            let xb = x_bar[j];
            let xb2 = xb.norm_sqr();
            let xc = xb.conj();
            for i in 0..m {
                let k = j * m + i;
                let sv = s_var[k];
                let sh = s_hat[k];
                r_den[j] += z_bar[i].norm_sqr() * sv;
                r_corr[j] += z_var[i] * sv;
                r_num[j] += z_bar[i].conj() * sh;
                q_den[i] += xb2 * sv;
                q_corr[i] += x_var[j] * sv;
                q_num[i] += xc * sh;
            }
        }

        // x denoiser
        for j in 1..l {
            let rv = 1.0 / r_den[j].max(tiny);
            let r = x_bar[j] * (1.0 - rv * r_corr[j]) + r_num[j] * rv;
            let (mean, var) = discrete_posterior(points, r, rv.max(tiny), &mut logw);
            x_hat[j] = mean;
            x_var[j] = var;
        }

        // z denoiser
        for i in 0..m {
            let qv = 1.0 / q_den[i].max(tiny);
            let q = z_bar[i] * (1.0 - qv * q_corr[i]) + q_num[i] * qv;
            let pv = priors.z_var[i];
            if pv <= 0.0 {
                z_hat[i] = priors.z_mean[i];
                z_var[i] = 0.0;
            } else if !qv.is_finite() {
                z_hat[i] = priors.z_mean[i];
                z_var[i] = pv;
            } else {
                z_hat[i] = (q * pv + priors.z_mean[i] * qv) / (pv + qv);
                z_var[i] = pv * qv / (pv + qv);
            }
        }

        let residual = residual_norm(y, &z_hat, &x_hat);
        if !residual.is_finite() || residual > opts.divergence_factor * initial_residual.max(tiny) {
            diverged = true;
            break;
        }
        if residual > last_residual {
            step = (step * 0.5).max(opts.min_step);
        } else {
            step = (step * opts.step_growth).min(opts.max_step);
        }
        last_residual = residual;

        let mut change = 0.0;
        let mut norm = 0.0;
        for (j, xj) in x_hat.iter().enumerate() {
            for (i, zi) in z_hat.iter().enumerate() {
                let k = j * m + i;
                let v = zi * xj;
                change += (v - product[k]).norm_sqr();
                norm += v.norm_sqr();
                product[k] = v;
            }
        }
        if change.sqrt() <= opts.tol * norm.sqrt().max(tiny) {
            converged = true;
            break;
        }
    }

    let residual = residual_norm(y, &z_hat, &x_hat);
    Ok(BigAmpOutput {
        z_hat: CVec::from_vec(z_hat),
        x_hat: CVec::from_vec(x_hat),
        iterations,
        converged,
        diverged,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_normal_mat, complex_normal_vec};
    use crate::model::{effective_channel, modulate, random_bits, sample_channels, sample_lis_state, PhaseShifts, SystemConfig};
    use crate::rx_factor::{estimate_bigamp, estimate_svd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block(cfg: &SystemConfig, rng: &mut ChaCha8Rng) -> (CMat, CVec, FactorPriors) {
        let ch = sample_channels(cfg, rng)
            .with_phases(&PhaseShifts::random(cfg.n, rng), cfg.beta)
            .unwrap();
        let s = sample_lis_state(cfg, rng);
        let x = modulate(&random_bits(cfg.payload_bits(), rng), cfg).unwrap();
        let z = effective_channel(&ch, &s).unwrap();
        let y = &z * x.transpose() + complex_normal_mat(rng, cfg.m, cfg.l, cfg.noise_var);
        let priors = FactorPriors::from_model(
            ch.a().unwrap(),
            &ch.h_d,
            cfg.rho,
            cfg.constellation.clone(),
            cfg.reference_symbol,
            cfg.noise_var,
        )
        .unwrap();
        (y, x, priors)
    }

    #[test]
    fn noiseless_blocks_decode_exactly() {
        let cfg = SystemConfig::reference_setup(0.0).with_noise_var(0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (y, x, priors) = block(&cfg, &mut rng);
            let est = estimate_bigamp(&y, &priors, &BigAmpOptions::default(), &mut rng).unwrap();
            assert!(!est.flagged);
            assert_eq!(est.x_tilde, x);
        }
    }

    #[test]
    fn degenerate_z_prior_pins_z() {
        // A = 0: z is known to be h_d exactly
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = Constellation::qpsk_gray(1.0);
        let reference = c.point_for_label(0).unwrap();
        let h_d = complex_normal_vec(&mut rng, 8, 1.0);
        let priors = FactorPriors::from_model(&CMat::zeros(8, 4), &h_d, 0.5, c.clone(), reference, 0.1).unwrap();
        assert!(priors.z_var.iter().all(|&v| v == 0.0));
        assert_eq!(priors.z_mean, h_d);
        let x = CVec::from_fn(12, |i, _| if i == 0 { reference } else { c.points()[(i * 5 + 1) % 4] });
        let y = &h_d * x.transpose() + complex_normal_mat(&mut rng, 8, 12, 0.1);
        let out = factor_bigamp(&y, &priors, &BigAmpOptions::default(), &mut rng).unwrap();
        assert_eq!(out.z_hat, h_d);
        assert_eq!(crate::rx_factor::demap(&out.x_hat, &c), x);
    }

    #[test]
    fn at_least_as_good_as_svd_in_moderate_noise() {
        let cfg = SystemConfig::reference_setup(-11.0);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (mut e_svd, mut e_amp) = (0, 0);
        for _ in 0..30 {
            let (y, x, priors) = block(&cfg, &mut rng);
            let svd = estimate_svd(&y, cfg.reference_symbol, &cfg.constellation).unwrap();
            let amp = estimate_bigamp(&y, &priors, &BigAmpOptions::default(), &mut rng).unwrap();
            e_svd += (1..cfg.l).filter(|&l| svd.x_tilde[l] != x[l]).count();
            e_amp += (1..cfg.l).filter(|&l| amp.x_tilde[l] != x[l]).count();
        }
        assert!(e_amp < e_svd, "bigamp {e_amp} vs svd {e_svd}");
    }

    #[test]
    fn divergence_falls_back_to_svd() {
        // a tiny start makes the first Onsager correction overshoot
        let cfg = SystemConfig::reference_setup(30.0);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let (y, x, priors) = block(&cfg, &mut rng);
        let opts = BigAmpOptions {
            init: BigAmpInit::PriorMean,
            ..Default::default()
        };
        let raw = factor_bigamp(&y, &priors, &opts, &mut rng).unwrap();
        assert!(raw.diverged);
        let est = estimate_bigamp(&y, &priors, &opts, &mut rng).unwrap();
        let svd = estimate_svd(&y, cfg.reference_symbol, &cfg.constellation).unwrap();
        assert!(est.flagged);
        assert_eq!(est.x_tilde, svd.x_tilde);
        assert_eq!(est.x_tilde, x);
    }

    #[test]
    fn residual_settles_below_start() {
        let cfg = SystemConfig::reference_setup(-5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let (y, _, priors) = block(&cfg, &mut rng);
        let out = factor_bigamp(&y, &priors, &BigAmpOptions::default(), &mut rng).unwrap();
        assert!(!out.diverged);
        assert!(out.residual < y.norm());
        assert!(out.iterations <= 200);
    }

    #[test]
    fn rejects_mismatched_prior() {
        let c = Constellation::qpsk_gray(1.0);
        let priors = FactorPriors::from_model(&CMat::zeros(3, 2), &CVec::zeros(3), 0.5, c.clone(), c.points()[0], 1.0).unwrap();
        let y = CMat::from_element(4, 5, C64::new(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        assert!(factor_bigamp(&y, &priors, &BigAmpOptions::default(), &mut rng).is_err());
    }
}
