//! Greedy baselines. The selected support is reported as the on-set.

use super::{SparseEstimate, SparseMethod, SparseObservation};
use crate::linalg::{columns, least_squares};
use crate::{CMat, CVec, Error, Result};

fn column_norms(a: &CMat) -> Vec<f64> {
    a.column_iter().map(|c| c.norm().max(1e-300)).collect()
}

fn residual_after(a: &CMat, support: &[usize], y: &CVec) -> (CVec, CVec) {
    let sub = columns(a, support);
    let coef = least_squares(&sub, y);
    let r = y - &sub * &coef;
    (coef, r)
}

fn indicator(n: usize, support: &[usize]) -> Vec<u8> {
    let mut s = vec![0u8; n];
    for &j in support {
        s[j] = 1;
    }
    s
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k > n {
        Err(Error::InvalidSparsity { k, n })
    } else {
        Ok(())
    }
}

/// Orthogonal matching pursuit, `k` atoms, normalized correlations.
pub fn omp_recover(obs: &SparseObservation, k: usize) -> Result<SparseEstimate> {
    let a = &obs.a;
    let n = a.ncols();
    check_k(k, n)?;
    let y = obs.centered();
    let norms = column_norms(a);
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut r = y.clone();
    for _ in 0..k {
        let corr = a.adjoint() * &r;
        let pick = (0..n)
            .filter(|j| !support.contains(j))
            .max_by(|&i, &j| {
                (corr[i].norm() / norms[i]).total_cmp(&(corr[j].norm() / norms[j]))
            })
            .expect("k <= n leaves a free column");
        support.push(pick);
        r = residual_after(a, &support, &y).1;
    }
    Ok(SparseEstimate {
        s_posterior: indicator(n, &support).iter().map(|&b| f64::from(b)).collect(),
        s_hat: indicator(n, &support),
        method: SparseMethod::Omp,
        iterations: k,
        converged: true,
        flagged: false,
    })
}

fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx.truncate(k);
    idx
}

/// CoSaMP with support size `k`: merge the `2k` strongest proxy entries
/// with the current support, least-squares fit, prune to `k`. Stops when
/// the residual stops shrinking or after `max_iter` rounds; the best
/// support seen is returned.
pub fn cosamp_recover(obs: &SparseObservation, k: usize, max_iter: usize) -> Result<SparseEstimate> {
    let a = &obs.a;
    let n = a.ncols();
    check_k(k, n)?;
    let y = obs.centered();
    let norms = column_norms(a);
    let y_norm = y.norm();

    let mut support: Vec<usize> = Vec::new();
    let mut r = y.clone();
    let mut best = (y_norm, support.clone());
    let mut iterations = 0;
    if k > 0 {
        while iterations < max_iter {
            iterations += 1;
            let proxy = a.adjoint() * &r;
            let score: Vec<f64> = (0..n).map(|j| proxy[j].norm() / norms[j]).collect();
            let mut merged = top_k(&score, (2 * k).min(n));
            for &j in &support {
                if !merged.contains(&j) {
                    merged.push(j);
                }
            }
            merged.sort_unstable();
            let (coef, _) = residual_after(a, &merged, &y);
            let mag: Vec<f64> = coef.iter().map(|c| c.norm()).collect();
            let mut pruned: Vec<usize> = top_k(&mag, k).into_iter().map(|i| merged[i]).collect();
            pruned.sort_unstable();
            let (_, r_new) = residual_after(a, &pruned, &y);
            let rn = r_new.norm();
            let stalled = rn >= best.0 * (1.0 - 1e-9);
            if rn < best.0 || best.1.is_empty() {
                best = (rn, pruned.clone());
            }
            support = pruned;
            r = r_new;
            if stalled || rn <= 1e-12 * y_norm.max(1e-300) {
                break;
            }
        }
    }
    let s_hat = indicator(n, &best.1);
    Ok(SparseEstimate {
        s_posterior: s_hat.iter().map(|&b| f64::from(b)).collect(),
        s_hat,
        method: SparseMethod::Cosamp,
        iterations,
        converged: true,
        flagged: false,
    })
}
