//! Grid sweeps over trials, aggregation into [`BerRecord`]s.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;

use crate::csv::{write_csv, BerRecord};
use crate::error::{HarnessError, Result};
use crate::spec::ExperimentSpec;
use crate::trial::{run_trial, GridCounts};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "PBIT_THREADS";

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Summed counts over all trials. The sum is order independent, so the
/// result does not depend on scheduling.
pub fn sweep_counts(spec: &ExperimentSpec) -> Result<GridCounts> {
    spec.validate()?;
    let work = || {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, t))
            .try_reduce(|| GridCounts::zeros(spec), |a, b| Ok(a.merge(&b)))
    };
    match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Invalid(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// One record per `(ρ, SNR, scheme)`, in that nesting order.
pub fn records_from_counts(spec: &ExperimentSpec, grid: &GridCounts) -> Vec<BerRecord> {
    let mut out = Vec::with_capacity(grid.counts.len());
    for (ri, &rho) in spec.rho_grid.iter().enumerate() {
        for (si, &snr_db) in spec.snr_grid_db.iter().enumerate() {
            for (ki, &scheme) in spec.schemes.iter().enumerate() {
                let c = grid.get(ri, si, ki);
                let ratio = |e: u64, n: u64| e as f64 / n.max(1) as f64;
                out.push(BerRecord {
                    snr_db,
                    rho,
                    scheme,
                    phase_mode: spec.phase_mode,
                    ber_x: scheme.has_x().then(|| ratio(c.bit_errors_x, c.bits_x)),
                    ber_s: scheme.has_s().then(|| ratio(c.errors_s, c.elements_s)),
                    bit_count_x: c.bits_x,
                    bit_count_s: c.elements_s,
                    erased_blocks: c.erased_blocks,
                    trials: spec.trials,
                    seed: spec.master_seed,
                });
            }
        }
    }
    out
}

pub fn sweep(spec: &ExperimentSpec) -> Result<Vec<BerRecord>> {
    Ok(records_from_counts(spec, &sweep_counts(spec)?))
}

pub fn write_records(records: &[BerRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(records, BufWriter::new(file)).map_err(|e| HarnessError::io(path, e))
}
