use rand::Rng;

use super::{QcqpData, SdpSolution};
use crate::linalg::{complex_normal_vec, hermitian_eigh};
use crate::model::PhaseShifts;
use crate::{CMat, CVec, Error, Result, C64};

/// Best candidate found by Gaussian randomization.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingOutcome {
    pub phases: PhaseShifts,
    /// `θ̄ᴴ (R + V) θ̄` at `θ̄ = [θ; 1]`.
    pub objective: f64,
    /// Index of the winning draw.
    pub best_draw: usize,
}

const MAX_REDRAWS: usize = 64;

/// Draws `θ̄ = U Σ^{1/2} r`, `r ~ CN(0, I)`, divides by the last entry and
/// clips every entry back to unit modulus. The first draw attaining the
/// largest objective wins.
pub fn randomized_rounding<R: Rng + ?Sized>(
    sol: &SdpSolution,
    q: &QcqpData,
    trials: usize,
    rng: &mut R,
) -> Result<RoundingOutcome> {
    let dim = q.dim();
    if sol.q.nrows() != dim {
        return Err(Error::DimensionMismatch {
            what: "SDP solution size",
            expected: dim,
            got: sol.q.nrows(),
        });
    }
    let n = dim - 1;
    let (vals, vecs) = hermitian_eigh(&sol.q);
    let mut factor: CMat = vecs;
    // eigenvalues at rounding-noise level would otherwise leak in at sqrt scale
    let cutoff = 1e-12 * vals.iter().fold(0.0, |a: f64, &b| a.max(b));
    for (k, &lam) in vals.iter().enumerate() {
        let lam = if lam > cutoff { lam } else { 0.0 };
        factor.column_mut(k).scale_mut(lam.sqrt());
    }
    let cost = q.combined();

    let mut best: Option<(CVec, f64, usize)> = None;
    for draw in 0..trials.max(1) {
        let mut candidate = None;
        for _ in 0..MAX_REDRAWS {
            let r = complex_normal_vec(rng, dim, 1.0);
            let bar = &factor * r;
            if bar[n].norm() > 1e-300 {
                candidate = Some(bar);
                break;
            }
        }
        let Some(bar) = candidate else {
            continue;
        };
        let t = bar[n];
        let theta_bar = CVec::from_fn(dim, |i, _| {
            if i == n {
                return C64::new(1.0, 0.0);
            }
            let v = bar[i] / t;
            let m = v.norm();
            if m > 0.0 && m.is_finite() {
                v / m
            } else {
                C64::new(1.0, 0.0)
            }
        });
        let obj = theta_bar.dotc(&(&cost * &theta_bar)).re;
        if best.as_ref().is_none_or(|(_, b, _)| obj > *b) {
            best = Some((theta_bar, obj, draw));
        }
    }
    let (theta_bar, objective, best_draw) = best.ok_or_else(|| {
        Error::InvalidConfig("SDP solution has no weight on the homogenizing entry".into())
    })?;
    let theta = theta_bar.rows(0, n).into_owned();
    Ok(RoundingOutcome {
        phases: PhaseShifts::new(theta)?,
        objective,
        best_draw,
    })
}
