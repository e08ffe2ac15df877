//! Link-level model and algorithms for passive beamforming with information
//! transfer over a large intelligent surface (LIS).
//!
//! A single-antenna user talks to an `M`-antenna receiver. An `N`-element
//! reflecting surface both boosts that link (through per-element phase
//! shifts) and sends its own bits by switching elements on and off. Each
//! block of `L` slots is observed as
//!
//! ```text
//! Y = (A s + h_d) xᵀ + W,    A = β G diag(θ) diag(h_r)
//! ```
//!
//! The crate is split along the processing chain:
//!
//! * [`model`]: configuration, channel/signal sampling, block synthesis,
//!   entropy helpers and seeded stream derivation.
//! * [`beamform`]: average-gain objective, homogenized QCQP, an ADMM
//!   semidefinite solver and Gaussian-randomization rounding.
//! * [`rx_factor`]: first receiver step. Rank-1 factorization of `Y` by SVD
//!   or bilinear AMP, pilot-based ambiguity removal and symbol demapping.
//! * [`rx_sparse`]: second receiver step. Matched-filter observation and
//!   recovery of the on/off pattern by GAMP, OMP or CoSaMP, plus the
//!   genie-aided lower bounds.

pub mod beamform;
pub mod error;
pub mod linalg;
pub mod model;
pub mod rx_factor;
pub mod rx_sparse;

pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
