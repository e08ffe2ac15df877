use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] pbit_core::Error),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("unknown scheme {0:?} (expected one of no-lis, svd, bigamp, lb-x, svd+gamp, bigamp+gamp, bigamp+omp, bigamp+cosamp, lb-s)")]
    UnknownScheme(String),
    #[error("unknown phase mode {0:?} (expected random or optimized)")]
    UnknownPhaseMode(String),
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            msg: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
