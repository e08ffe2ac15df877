use crate::model::{ChannelState, PhaseShifts};
use crate::{CMat, CVec, Error, Result, C64};

/// Average receive gain `E_s ‖A s + h_d‖²` for i.i.d. Bernoulli(ρ) states,
/// with `A = β G Θ D_h`:
///
/// ```text
/// ρ² ‖A 1‖² + 2ρ Re(h_dᴴ A 1) + ρ(1-ρ) Σ_n ‖a_n‖² + ‖h_d‖²
/// ```
///
/// The last term does not depend on `θ` but is kept so the value is the full
/// physical expectation.
pub fn expected_gain(phases: &PhaseShifts, ch: &ChannelState, rho: f64, beta: f64) -> Result<f64> {
    let a = ch.coefficient_matrix(phases, beta)?;
    let sum_cols: CVec = a.column_sum();
    let col_energy: f64 = a.column_iter().map(|c| c.norm_squared()).sum();
    Ok(rho * rho * sum_cols.norm_squared()
        + 2.0 * rho * ch.h_d.dotc(&sum_cols).re
        + rho * (1.0 - rho) * col_energy
        + ch.h_d.norm_squared())
}

/// Homogenized quadratic program `max θ̄ᴴ (R + V) θ̄` over unit-modulus
/// `θ̄ = [θ; t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QcqpData {
    /// `[[ρ² BᴴB, ρ Bᴴh_d], [ρ h_dᴴB, 0]]` with `B = β G D_h`.
    pub r: CMat,
    /// `blockdiag(ρ(1-ρ) diag(v), 0)`.
    pub v: CMat,
    /// Column energies of `B`, i.e. the diagonal of `BᴴB`.
    pub v_diag: Vec<f64>,
    /// `‖h_d‖²`, the θ-independent part of the average gain.
    pub constant: f64,
}

impl QcqpData {
    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    /// `R + V`.
    pub fn combined(&self) -> CMat {
        &self.r + &self.v
    }

    /// `θ̄ᴴ (R + V) θ̄`.
    pub fn objective(&self, theta_bar: &CVec) -> Result<f64> {
        if theta_bar.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "homogenized phase vector",
                expected: self.dim(),
                got: theta_bar.len(),
            });
        }
        let c = self.combined();
        Ok(theta_bar.dotc(&(c * theta_bar)).re)
    }
}

pub fn build_qcqp(ch: &ChannelState, rho: f64, beta: f64) -> QcqpData {
    let n = ch.n();
    let b = ch.cascade(beta);
    let gram = b.adjoint() * &b;
    let cross = b.adjoint() * &ch.h_d;
    let v_diag: Vec<f64> = (0..n).map(|i| gram[(i, i)].re).collect();

    let mut r = CMat::zeros(n + 1, n + 1);
    r.view_mut((0, 0), (n, n)).copy_from(&gram.scale(rho * rho));
    for i in 0..n {
        r[(i, n)] = cross[i] * rho;
        r[(n, i)] = cross[i].conj() * rho;
    }

    let mut v = CMat::zeros(n + 1, n + 1);
    for (i, &e) in v_diag.iter().enumerate() {
        v[(i, i)] = C64::new(rho * (1.0 - rho) * e, 0.0);
    }

    QcqpData {
        r,
        v,
        v_diag,
        constant: ch.h_d.norm_squared(),
    }
}
