//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{CMat, CVec, C64};

/// Draw one CN(0, var) sample: `var / 2` per real component.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let sd = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(sd * re, sd * im)
}

pub fn complex_normal_vec<R: Rng + ?Sized>(rng: &mut R, len: usize, var: f64) -> CVec {
    CVec::from_fn(len, |_, _| complex_normal(rng, var))
}

/// Row-major fill so that the draw order is independent of nalgebra's storage.
pub fn complex_normal_mat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, var: f64) -> CMat {
    let mut out = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            out[(i, j)] = complex_normal(rng, var);
        }
    }
    out
}

/// Unit-modulus number with uniform phase on [0, 2π).
pub fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    C64::from_polar(1.0, phi)
}

/// Hermitian part `(X + Xᴴ) / 2`.
pub fn hermitian_part(x: &CMat) -> CMat {
    (x + x.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
pub fn hermitian_eigh(x: &CMat) -> (DVector<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(x));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Projection onto the positive semidefinite cone (Frobenius norm).
pub fn project_psd(x: &CMat) -> CMat {
    let eig = SymmetricEigen::new(hermitian_part(x));
    let mut factor = eig.eigenvectors;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let w = lam.max(0.0).sqrt();
        factor.column_mut(k).scale_mut(w);
    }
    &factor * factor.adjoint()
}

pub fn max_eigenvalue(x: &CMat) -> f64 {
    SymmetricEigen::new(hermitian_part(x))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn min_eigenvalue(x: &CMat) -> f64 {
    SymmetricEigen::new(hermitian_part(x))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `tr(A B)` for square matrices of equal size.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Real quadratic form `vᴴ H v` for Hermitian `H`.
pub fn quad_form(h: &CMat, v: &CVec) -> f64 {
    v.dotc(&(h * v)).re
}

/// Dominant singular triplet `(σ₁, u₁, v₁)` and all singular values, with
/// `Y = U Σ Vᴴ`.
///
/// Taken from the Hermitian eigendecomposition of the smaller Gram matrix.
/// nalgebra's complex SVD returns factors that do not recompose `Y` on a
/// sizeable fraction of low-rank inputs, exact rank-1 blocks included.
pub fn top_singular(y: &CMat) -> (f64, CVec, CVec, Vec<f64>) {
    let wide = y.nrows() <= y.ncols();
    let gram = if wide { y * y.adjoint() } else { y.adjoint() * y };
    let (vals, vecs) = hermitian_eigh(&gram);
    let sv: Vec<f64> = vals.iter().map(|l| l.max(0.0).sqrt()).collect();
    let sigma = sv[0];
    let lead = vecs.column(0).into_owned();
    let scale = if sigma > 0.0 { 1.0 / sigma } else { 0.0 };
    let (u, v) = if wide {
        let v = (y.adjoint() * &lead).scale(scale);
        (lead, v)
    } else {
        let u = (y * &lead).scale(scale);
        (u, lead)
    };
    (sigma, u, v, sv)
}

/// Least-squares solution of `D c ≈ y` (minimum norm when `D` is rank
/// deficient), via the eigendecomposition of `Dᴴ D`.
pub fn least_squares(d: &CMat, y: &CVec) -> CVec {
    if d.ncols() == 0 {
        return CVec::zeros(0);
    }
    let (vals, vecs) = hermitian_eigh(&(d.adjoint() * d));
    let cutoff = 1e-24 * vals.max().max(1e-300);
    let rhs = vecs.adjoint() * (d.adjoint() * y);
    let coef = CVec::from_fn(rhs.len(), |k, _| if vals[k] > cutoff { rhs[k] / vals[k] } else { C64::new(0.0, 0.0) });
    vecs * coef
}

pub fn columns(d: &CMat, idx: &[usize]) -> CMat {
    let mut out = CMat::zeros(d.nrows(), idx.len());
    for (j, &c) in idx.iter().enumerate() {
        out.set_column(j, &d.column(c));
    }
    out
}

pub fn real_diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_row_slice(v))
}
