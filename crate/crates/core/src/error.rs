use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("phase shift {index} has modulus {modulus}, expected 1")]
    NonUnitModulus { index: usize, modulus: f64 },

    #[error("bit stream has {got} bits, expected {expected}")]
    BitLength { expected: usize, got: usize },

    #[error("value {value} outside [{lo}, {hi}] for {what}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("received block is identically zero")]
    ZeroObservation,

    #[error("pilot estimate magnitude {0:e} too small to resolve the scalar ambiguity")]
    AmbiguityUnresolvable(f64),

    #[error("sparsity {k} outside [0, {n}]")]
    InvalidSparsity { k: usize, n: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
