//! Receiver step one: recover `x` (and `z`) from `Y ≈ z xᵀ`.
//!
//! Both factorizers leave a complex scale ambiguity `(z/γ, γx)`. It is
//! removed with the reference symbol in slot 1, after which the symbols are
//! sliced to the constellation.

mod bigamp;

use rand::Rng;

pub use bigamp::{factor_bigamp, BigAmpInit, BigAmpOptions, BigAmpOutput, FactorPriors};

use crate::linalg::top_singular;
use crate::model::Constellation;
use crate::{CMat, CVec, Error, Result, C64};

/// Below this `|x̂₁|` the pilot cannot fix the scale.
pub const MIN_PILOT_MAGNITUDE: f64 = 1e-12;

/// Rank-1 factors before ambiguity removal.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFactor {
    pub z_hat: CVec,
    pub x_hat: CVec,
    /// `‖Y − ẑx̂ᵀ‖_F`.
    pub residual: f64,
    pub iterations: usize,
    /// Set when the iterative method diverged.
    pub flagged: bool,
}

/// Output of the first receiver step.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorEstimate {
    /// `ẑ/γ`.
    pub z_hat: CVec,
    /// `γ x̂`; slot 1 equals the reference symbol.
    pub x_hat: CVec,
    pub gamma: C64,
    /// Hard symbol decisions.
    pub x_tilde: CVec,
    pub iterations: usize,
    pub residual: f64,
    pub flagged: bool,
}

/// Best rank-1 approximation. With `Y = U Λ Vᴴ`, the returned factors are
/// `ẑ = λ₁ u₁` and `x̂ = conj(v₁)`, so `ẑ x̂ᵀ = λ₁ u₁ v₁ᴴ`. The free phase
/// is fixed by making `x̂₁` real and nonnegative.
pub fn factor_svd(y: &CMat) -> Result<RawFactor> {
    if y.is_empty() || y.iter().all(|v| *v == C64::new(0.0, 0.0)) {
        return Err(Error::ZeroObservation);
    }
    let (sigma, u, v, sv) = top_singular(y);
    let mut x_hat = v.map(|c| c.conj());
    let mut z_hat = u.scale(sigma);

    let anchor = if x_hat[0].norm() > MIN_PILOT_MAGNITUDE {
        x_hat[0]
    } else {
        let k = (0..x_hat.len())
            .max_by(|&i, &j| x_hat[i].norm().total_cmp(&x_hat[j].norm()))
            .unwrap_or(0);
        x_hat[k]
    };
    let rot = anchor.conj() / anchor.norm();
    x_hat *= rot;
    z_hat /= rot;

    let rest: f64 = sv.iter().map(|s| s * s).sum::<f64>() - sigma * sigma;
    Ok(RawFactor {
        z_hat,
        x_hat,
        residual: rest.max(0.0).sqrt(),
        iterations: 0,
        flagged: false,
    })
}

/// `γ = x₁ / x̂₁`, returns `(ẑ/γ, γx̂, γ)`.
pub fn correct_ambiguity(z_hat: &CVec, x_hat: &CVec, reference: C64) -> Result<(CVec, CVec, C64)> {
    let pilot = x_hat.get(0).copied().unwrap_or_default();
    if pilot.norm() < MIN_PILOT_MAGNITUDE {
        return Err(Error::AmbiguityUnresolvable(pilot.norm()));
    }
    let gamma = reference / pilot;
    let mut x = x_hat * gamma;
    x[0] = reference;
    Ok((z_hat / gamma, x, gamma))
}

/// Nearest-point slicing, ties to the lowest constellation index.
pub fn demap(x: &CVec, c: &Constellation) -> CVec {
    x.map(|v| c.nearest(v))
}

/// Ambiguity removal and slicing on top of a raw factorization.
pub fn finish_factorization(raw: RawFactor, reference: C64, c: &Constellation) -> Result<FactorEstimate> {
    let (z_hat, x_hat, gamma) = correct_ambiguity(&raw.z_hat, &raw.x_hat, reference)?;
    let mut x_tilde = demap(&x_hat, c);
    x_tilde[0] = reference;
    Ok(FactorEstimate {
        z_hat,
        x_hat,
        gamma,
        x_tilde,
        iterations: raw.iterations,
        residual: raw.residual,
        flagged: raw.flagged,
    })
}

/// SVD factorization followed by pilot correction and slicing.
pub fn estimate_svd(y: &CMat, reference: C64, c: &Constellation) -> Result<FactorEstimate> {
    finish_factorization(factor_svd(y)?, reference, c)
}

/// BiG-AMP factorization followed by pilot correction and slicing. A
/// diverged run is flagged and replaced by the SVD factors.
pub fn estimate_bigamp<R: Rng + ?Sized>(
    y: &CMat,
    priors: &FactorPriors,
    opts: &BigAmpOptions,
    rng: &mut R,
) -> Result<FactorEstimate> {
    let out = factor_bigamp(y, priors, opts, rng)?;
    let raw = if out.diverged {
        RawFactor {
            flagged: true,
            iterations: out.iterations,
            ..factor_svd(y)?
        }
    } else {
        RawFactor {
            z_hat: out.z_hat,
            x_hat: out.x_hat,
            residual: out.residual,
            iterations: out.iterations,
            flagged: false,
        }
    };
    finish_factorization(raw, priors.reference_symbol, &priors.constellation)
}
