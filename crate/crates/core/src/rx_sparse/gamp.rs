//! GAMP for `y = A s + w` with i.i.d. Bernoulli(ρ) `s ∈ {0,1}ᴺ` and
//! `w ~ CN(0, w_var I)`.

use super::{SparseEstimate, SparseMethod, SparseObservation};
use crate::{Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GampOptions {
    pub max_iter: usize,
    /// Stop when `‖ŝ − ŝ_prev‖₂` falls below this.
    pub tol: f64,
    /// Weight on the new estimate, in (0, 1].
    pub damping: f64,
}

impl Default for GampOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-8,
            damping: 1.0,
        }
    }
}

/// Posterior `P(s = 1 | r)` where `r = s + CN(0, var)` and `P(s = 1) = ρ`.
///
/// Only `Re r` matters: `|r|² − |r − 1|² = 2 Re r − 1`.
pub fn bernoulli_posterior(r: C64, var: f64, rho: f64) -> f64 {
    if rho >= 1.0 {
        return 1.0;
    }
    if rho <= 0.0 {
        return 0.0;
    }
    let llr = (rho / (1.0 - rho)).ln() + (2.0 * r.re - 1.0) / var;
    if llr >= 0.0 {
        1.0 / (1.0 + (-llr).exp())
    } else {
        let e = llr.exp();
        e / (1.0 + e)
    }
}

/// Threshold at 1/2; an exact tie resolves to 1 iff `ρ ≥ 1/2`.
pub fn hard_decision(posterior: f64, rho: f64) -> u8 {
    if posterior > 0.5 || (posterior == 0.5 && rho >= 0.5) {
        1
    } else {
        0
    }
}

pub fn gamp_recover(obs: &SparseObservation, rho: f64, opts: &GampOptions) -> Result<SparseEstimate> {
    let a = &obs.a;
    let (m, n) = a.shape();
    let y = obs.centered();
    let w = obs.w_var;
    let tiny = 1e-300;

    let a2: Vec<f64> = a.iter().map(|v| v.norm_sqr()).collect();
    let mut x_hat = vec![rho; n];
    let mut x_var = vec![rho * (1.0 - rho); n];
    let mut s_hat = vec![C64::new(0.0, 0.0); m];
    let mut p_var = vec![0.0; m];
    let mut s_var = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = false;
    let mut diverged = false;

    while iterations < opts.max_iter {
        iterations += 1;

        // output linear step
        p_var.iter_mut().for_each(|v| *v = 0.0);
        let mut ax = vec![C64::new(0.0, 0.0); m];
        for j in 0..n {
            let col = &a.as_slice()[j * m..(j + 1) * m];
            let col2 = &a2[j * m..(j + 1) * m];
            for i in 0..m {
                p_var[i] += col2[i] * x_var[j];
                ax[i] += col[i] * x_hat[j];
            }
        }
        for i in 0..m {
            let p_hat = ax[i] - s_hat[i] * p_var[i];
            let sv = 1.0 / (p_var[i] + w);
            let sh = (y[i] - p_hat) * sv;
            s_hat[i] = sh * opts.damping + s_hat[i] * (1.0 - opts.damping);
            s_var[i] = sv;
        }

        // input linear step and denoiser
        let mut change = 0.0;
        for j in 0..n {
            let col = &a.as_slice()[j * m..(j + 1) * m];
            let col2 = &a2[j * m..(j + 1) * m];
            let mut den = 0.0;
            let mut num = C64::new(0.0, 0.0);
            for i in 0..m {
                den += col2[i] * s_var[i];
                num += col[i].conj() * s_hat[i];
            }
            let r_var = 1.0 / den.max(tiny);
            let r_hat = C64::new(x_hat[j], 0.0) + num * r_var;
            let post = bernoulli_posterior(r_hat, r_var, rho);
            let new = opts.damping * post + (1.0 - opts.damping) * x_hat[j];
            change += (new - x_hat[j]).powi(2);
            x_hat[j] = new;
            x_var[j] = (post * (1.0 - post)).max(0.0);
        }

        if !change.is_finite() || x_hat.iter().any(|v| !v.is_finite()) {
            diverged = true;
            break;
        }
        if change.sqrt() < opts.tol {
            converged = true;
            break;
        }
    }

    let s_posterior: Vec<f64> = x_hat.iter().map(|v| if v.is_finite() { v.clamp(0.0, 1.0) } else { rho }).collect();
    Ok(SparseEstimate {
        s_hat: s_posterior.iter().map(|&p| hard_decision(p, rho)).collect(),
        s_posterior,
        method: SparseMethod::Gamp,
        iterations,
        converged,
        flagged: diverged,
    })
}
