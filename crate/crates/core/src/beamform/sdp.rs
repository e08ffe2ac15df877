//! ADMM for the max-cut style SDP
//!
//! ```text
//! max tr(C Q)  s.t.  Q ⪰ 0,  Q_nn = 1
//! ```
//!
//! The problem is split as `X = Z` with `X` in the unit-diagonal affine set
//! and `Z` in the PSD cone. The affine step is closed form (overwrite the
//! diagonal), the cone step is an eigenvalue clip. The penalty is balanced
//! between primal and dual residuals every few iterations.
//!
//! The returned `Q` is the PSD iterate rescaled to an exact unit diagonal, so
//! it is always feasible. A dual certificate `Σ y + n·λ_max(C - Diag y)` with
//! `y_n = Re (C Q)_nn` gives a valid upper bound on the optimum.

use crate::linalg::{hermitian_part, max_eigenvalue, project_psd, trace_product};
use crate::{CMat, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Bound on the primal and dual residuals of the scaled problem.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpResiduals {
    /// `‖X − Z‖_F` on the scaled problem.
    pub primal: f64,
    /// `μ ‖Z − Z_prev‖_F` on the scaled problem.
    pub dual: f64,
    /// Dual bound minus primal objective, unscaled.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub q: CMat,
    /// `tr(C Q)`.
    pub objective: f64,
    /// Certified upper bound on the SDP optimum.
    pub dual_bound: f64,
    pub solver_iterations: usize,
    pub residuals: SdpResiduals,
    /// False when `max_iter` was hit; `q` is then the last iterate.
    pub converged: bool,
}

fn set_unit_diagonal(x: &mut CMat) {
    for i in 0..x.nrows() {
        x[(i, i)] = C64::new(1.0, 0.0);
    }
}

/// Symmetric rescaling `D^{-1/2} Z D^{-1/2}` onto the unit diagonal.
fn normalize_diagonal(z: &CMat) -> CMat {
    let n = z.nrows();
    let d: Vec<f64> = (0..n).map(|i| z[(i, i)].re).collect();
    if d.iter().any(|&v| !(v > 1e-12)) {
        return CMat::identity(n, n);
    }
    let mut q = z.clone();
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] /= (d[i] * d[j]).sqrt();
        }
    }
    let mut q = hermitian_part(&q);
    set_unit_diagonal(&mut q);
    q
}

/// Upper bound on `max tr(C Q)` from a diagonal dual guess.
pub fn dual_bound(c: &CMat, q: &CMat) -> f64 {
    let n = c.nrows();
    let cq = c * q;
    let y: Vec<f64> = (0..n).map(|i| cq[(i, i)].re).collect();
    let mut slack = c.clone();
    for (i, &yi) in y.iter().enumerate() {
        slack[(i, i)] -= C64::new(yi, 0.0);
    }
    y.iter().sum::<f64>() + n as f64 * max_eigenvalue(&slack).max(0.0)
}

pub fn solve_sdp(c: &CMat, opts: &SdpOptions) -> Result<SdpSolution> {
    let n = c.nrows();
    if c.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "SDP cost matrix columns",
            expected: n,
            got: c.ncols(),
        });
    }
    let c = hermitian_part(c);
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        let q = CMat::identity(n, n);
        return Ok(SdpSolution {
            q,
            objective: 0.0,
            dual_bound: 0.0,
            solver_iterations: 0,
            residuals: SdpResiduals {
                primal: 0.0,
                dual: 0.0,
                gap: 0.0,
            },
            converged: true,
        });
    }
    let cs = c.scale(1.0 / scale);

    let mut mu = 1.0;
    let mut z = CMat::identity(n, n);
    let mut u = CMat::zeros(n, n);
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let mut x = &z - &u + cs.scale(1.0 / mu);
        set_unit_diagonal(&mut x);
        let z_prev = std::mem::replace(&mut z, project_psd(&(&x + &u)));
        let diff = &x - &z;
        u += &diff;

        primal = diff.norm();
        dual = mu * (&z - &z_prev).norm();
        if primal <= opts.tol && dual <= opts.tol {
            converged = true;
            break;
        }
        if iterations % 10 == 0 {
            if primal > 10.0 * dual {
                mu *= 2.0;
                u.unscale_mut(2.0);
            } else if dual > 10.0 * primal {
                mu /= 2.0;
                u.scale_mut(2.0);
            }
        }
    }

    let q = normalize_diagonal(&z);
    let objective = trace_product(&c, &q).re;
    let bound = dual_bound(&c, &q);
    Ok(SdpSolution {
        q,
        objective,
        dual_bound: bound,
        solver_iterations: iterations,
        residuals: SdpResiduals {
            primal,
            dual,
            gap: bound - objective,
        },
        converged,
    })
}
