//! Receiver step two: recover the LIS on/off pattern from the
//! matched-filter observation `z̃ = Y conj(x̃) / (L P) = A s + h_d + w`.

mod gamp;
mod greedy;

pub use gamp::{bernoulli_posterior, gamp_recover, hard_decision, GampOptions};
pub use greedy::{cosamp_recover, omp_recover};

use crate::model::{Constellation, SystemConfig};
use crate::rx_factor::demap;
use crate::{CMat, CVec, Error, Result};

/// Relative floor on the distortion variance so noiseless blocks stay
/// well-posed.
const MIN_RELATIVE_W_VAR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseObservation {
    /// Matched-filter output before cancelling `h_d`.
    pub z_tilde: CVec,
    /// Assumed per-entry distortion variance.
    pub w_var: f64,
    /// `A = β G Θ D_h`.
    pub a: CMat,
    pub h_d: CVec,
}

impl SparseObservation {
    pub fn new(z_tilde: CVec, w_var: f64, a: CMat, h_d: CVec) -> Result<Self> {
        if z_tilde.len() != a.nrows() || h_d.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                what: "observation length vs A rows",
                expected: a.nrows(),
                got: z_tilde.len().min(h_d.len()),
            });
        }
        if !(w_var > 0.0 && w_var.is_finite()) {
            return Err(Error::InvalidConfig(format!("distortion variance {w_var} must be > 0")));
        }
        Ok(Self { z_tilde, w_var, a, h_d })
    }

    /// `z̃ − h_d`.
    pub fn centered(&self) -> CVec {
        &self.z_tilde - &self.h_d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SparseMethod {
    Gamp,
    Omp,
    Cosamp,
    LowerBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseEstimate {
    pub s_hat: Vec<u8>,
    /// Posterior on-probabilities (0/1 for the greedy methods).
    pub s_posterior: Vec<f64>,
    pub method: SparseMethod,
    pub iterations: usize,
    pub converged: bool,
    /// Numerical breakdown; the estimate is still usable but suspect.
    pub flagged: bool,
}

/// Noise variance left on `z̃` after matched filtering with the true
/// symbols: `σ_w² / (L P)`.
pub fn distortion_variance(cfg: &SystemConfig) -> f64 {
    cfg.noise_var / (cfg.l as f64 * cfg.power)
}

/// `z̃ = (1/(L P)) Y conj(x̃)`. `a` is the coefficient matrix for the
/// block's phases.
pub fn form_observation(
    y: &CMat,
    x_tilde: &CVec,
    cfg: &SystemConfig,
    a: &CMat,
    h_d: &CVec,
) -> Result<SparseObservation> {
    if x_tilde.len() != y.ncols() {
        return Err(Error::DimensionMismatch {
            what: "symbol vector vs Y columns",
            expected: y.ncols(),
            got: x_tilde.len(),
        });
    }
    let z_tilde = (y * x_tilde.map(|v| v.conj())).unscale(cfg.l as f64 * cfg.power);
    let col_energy = a.norm_squared() / a.ncols().max(1) as f64;
    let floor = MIN_RELATIVE_W_VAR * col_energy.max(1e-300);
    SparseObservation::new(z_tilde, distortion_variance(cfg).max(floor), a.clone(), h_d.clone())
}

/// Genie symbol detector: `x̃ = slice(zᴴ Y / ‖z‖²)` with the true `z`.
pub fn lower_bound_x(y: &CMat, z_true: &CVec, c: &Constellation) -> CVec {
    let mf = (z_true.adjoint() * y).transpose();
    let energy = z_true.norm_squared().max(1e-300);
    demap(&mf.unscale(energy), c)
}

/// Genie LIS detector: GAMP on the observation formed with the true `x`.
pub fn lower_bound_s(
    y: &CMat,
    x_true: &CVec,
    cfg: &SystemConfig,
    a: &CMat,
    h_d: &CVec,
    opts: &GampOptions,
) -> Result<SparseEstimate> {
    let obs = form_observation(y, x_true, cfg, a, h_d)?;
    let mut est = gamp_recover(&obs, cfg.rho, opts)?;
    est.method = SparseMethod::LowerBound;
    Ok(est)
}
