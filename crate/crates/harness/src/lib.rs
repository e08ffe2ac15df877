//! Monte Carlo BER experiments for the PBIT link: experiment files, seeded
//! trials, grid sweeps, CSV output and the `pbit` command line.

pub mod cli;
pub mod csv;
pub mod error;
pub mod plot;
pub mod spec;
pub mod stats;
pub mod sweep;
pub mod trial;

pub use error::{HarnessError, Result};
pub use spec::{ExperimentSpec, PhaseMode, Scheme};
