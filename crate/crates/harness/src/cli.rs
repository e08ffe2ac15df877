//! `pbit` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pbit_core::beamform::{expected_gain, optimize_phases, write_phases, BeamformOptions};
use pbit_core::model::{binary_entropy, sample_channels, snr_db_to_noise_var, PhaseShifts, Purpose, StreamFactory};

use crate::csv::{format_sig, BerRecord};
use crate::error::{HarnessError, Result};
use crate::plot::plot_script;
use crate::spec::{parse_grid, parse_schemes, ExperimentSpec, Scheme};
use crate::sweep::{sweep, write_records};
use crate::trial::TrialContext;

#[derive(Debug, Parser)]
#[command(name = "pbit", version, about = "Passive beamforming and information transfer link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// BER of x and s versus SNR
    SweepSnr(Common),
    /// BER versus SNR for a grid of on-probabilities
    SweepRho {
        #[command(flatten)]
        common: Common,
        /// Grid of rho values, e.g. "0.5:0.1:1"
        #[arg(long)]
        rho_grid: Option<String>,
    },
    /// Design phases for one channel draw and compare with random phases
    OptimizePhases(Common),
    /// Verbose dump of a single trial
    SingleTrial {
        #[command(flatten)]
        common: Common,
        /// Trial index
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Write a matplotlib script that plots a sweep CSV
    EmitPlots {
        /// CSV produced by a sweep
        #[arg(long, default_value = "pbit.csv")]
        csv: String,
        /// Script path
        #[arg(long, default_value = "plot_pbit.py")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// key = value experiment file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per grid point
    #[arg(long)]
    trials: Option<u64>,
    /// Output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma separated scheme tags
    #[arg(long)]
    schemes: Option<String>,
    /// random or optimized
    #[arg(long)]
    phase_mode: Option<String>,
    /// SNR grid in dB, e.g. "-20:2:0"
    #[arg(long, allow_hyphen_values = true)]
    snr_grid: Option<String>,
}

impl Common {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                ExperimentSpec::parse(&text)?
            }
            None => ExperimentSpec::reference(),
        };
        if let Some(seed) = self.seed {
            spec.master_seed = seed;
        }
        if let Some(trials) = self.trials {
            spec.trials = trials;
        }
        if let Some(out) = &self.out {
            spec.output_path = out.to_string_lossy().into_owned();
        }
        if let Some(s) = &self.schemes {
            spec.schemes = parse_schemes(s)?;
        }
        if let Some(m) = &self.phase_mode {
            spec.phase_mode = m.parse()?;
        }
        if let Some(g) = &self.snr_grid {
            spec.snr_grid_db = parse_grid(g).map_err(HarnessError::Invalid)?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Runs the command line and returns the process exit status. Usage
/// errors exit with 2, runtime errors with 1.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                return 2;
            }
            let _ = out.write_all(text.as_bytes());
            return 0;
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            if out.write_all(text.as_bytes()).is_err() {
                return 1;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<String> {
    match cmd {
        Command::SweepSnr(common) => run_sweep(common.spec()?),
        Command::SweepRho { common, rho_grid } => {
            let mut spec = common.spec()?;
            spec.rho_grid = match rho_grid {
                Some(g) => parse_grid(&g).map_err(HarnessError::Invalid)?,
                None => vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            };
            if common.schemes.is_none() && common.config.is_none() {
                spec.schemes = vec![Scheme::BigAmp];
            }
            spec.validate()?;
            run_sweep(spec)
        }
        Command::OptimizePhases(common) => optimize(&common.spec()?, common.out.as_deref()),
        Command::SingleTrial { common, trial } => single_trial(&common.spec()?, trial),
        Command::EmitPlots { csv, out } => {
            fs::write(&out, plot_script(&csv)).map_err(|e| HarnessError::io(&out, e))?;
            Ok(format!("wrote {}\n", out.display()))
        }
    }
}

fn run_sweep(spec: ExperimentSpec) -> Result<String> {
    let records = sweep(&spec)?;
    write_records(&records, Path::new(&spec.output_path))?;
    Ok(summary(&spec, &records))
}

fn summary(spec: &ExperimentSpec, records: &[BerRecord]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} trials, seed {}, {} phases -> {}",
        spec.trials, spec.master_seed, spec.phase_mode, spec.output_path
    );
    let mut rhos = spec.rho_grid.clone();
    rhos.dedup();
    for rho in rhos {
        let _ = writeln!(s, "rho {} (rate {:.4} bit/element)", format_sig(rho), binary_entropy(rho));
    }
    let _ = writeln!(s, "{:>8} {:>6} {:>14} {:>12} {:>12}", "snr_db", "rho", "scheme", "ber_x", "ber_s");
    let cell = |v: Option<f64>| v.map_or("-".to_string(), |b| format!("{b:.4e}"));
    for r in records {
        let _ = writeln!(
            s,
            "{:>8} {:>6} {:>14} {:>12} {:>12}",
            format_sig(r.snr_db),
            format_sig(r.rho),
            r.scheme.tag(),
            cell(r.ber_x),
            cell(r.ber_s)
        );
    }
    s
}

fn optimize(spec: &ExperimentSpec, out: Option<&Path>) -> Result<String> {
    let factory = StreamFactory::new(spec.master_seed);
    let cfg = &spec.cfg;
    let ch = sample_channels(cfg, &mut factory.stream(0, Purpose::Channel));
    let mut rng = factory.stream(0, Purpose::Rounding);
    let res = optimize_phases(&ch, cfg.rho, cfg.beta, &BeamformOptions::default(), &mut rng)?;

    let mut baseline_rng = factory.stream(0, Purpose::RandomPhases);
    let baseline = (0..1000)
        .map(|_| expected_gain(&PhaseShifts::random(cfg.n, &mut baseline_rng), &ch, cfg.rho, cfg.beta))
        .collect::<pbit_core::Result<Vec<f64>>>()?;
    let mean = baseline.iter().sum::<f64>() / baseline.len() as f64;
    let best = baseline.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut s = String::new();
    let mut angles = Vec::new();
    write_phases(&res.phases, &mut angles)?;
    s.push_str("# theta (rad)\n");
    s.push_str(&String::from_utf8_lossy(&angles));
    let _ = writeln!(s, "optimized gain     {:.6}", res.expected_gain);
    let _ = writeln!(s, "sdp upper bound    {:.6}", res.upper_bound);
    let _ = writeln!(s, "random mean (1000) {mean:.6}");
    let _ = writeln!(s, "random best (1000) {best:.6}");
    let _ = writeln!(s, "improvement        {:.3} dB", 10.0 * (res.expected_gain / mean).log10());
    let _ = writeln!(
        s,
        "sdp iterations     {} (converged: {})",
        res.sdp.solver_iterations, res.sdp.converged
    );
    if let Some(path) = out {
        fs::write(path, &angles).map_err(|e| HarnessError::io(path, e))?;
    }
    Ok(s)
}

fn single_trial(spec: &ExperimentSpec, trial: u64) -> Result<String> {
    let factory = StreamFactory::new(spec.master_seed);
    let mut s = String::new();
    for (ri, &rho) in spec.rho_grid.iter().enumerate() {
        let ctx = TrialContext::draw(spec, trial, ri)?;
        let c = &ctx.cfg;
        let _ = writeln!(
            s,
            "trial {trial} seed {} M={} N={} L={} beta={} rho={} phases={}",
            spec.master_seed, c.m, c.n, c.l, c.beta, format_sig(rho), spec.phase_mode
        );
        let _ = writeln!(s, "expected gain {:.6}  |h_d|^2 {:.6}", ctx.expected_gain, ctx.channels.h_d.norm_squared());
        let _ = writeln!(s, "|z|^2 {:.6}", ctx.z.norm_squared());
        let bits: String = ctx.s.iter().map(|b| char::from(b'0' + b)).collect();
        let _ = writeln!(s, "s {bits}");
        let angles: Vec<String> = ctx.phases.angles().iter().map(|a| format!("{a:.4}")).collect();
        let _ = writeln!(s, "theta {}", angles.join(" "));
        for (si, &snr) in spec.snr_grid_db.iter().enumerate() {
            let tag = ((ri as u32) << 16) | si as u32;
            let mut rng = factory.stream_with_tag(trial, Purpose::Receiver, tag);
            let res = ctx.evaluate(&spec.schemes, snr_db_to_noise_var(snr), &mut rng)?;
            let _ = writeln!(s, "snr {} dB", format_sig(snr));
            for (scheme, cnt) in res {
                let _ = write!(s, "  {:<14}", scheme.tag());
                if scheme.has_x() {
                    let _ = write!(s, " x errors {:>4}/{}", cnt.bit_errors_x, cnt.bits_x);
                }
                if scheme.has_s() {
                    let _ = write!(s, " s errors {:>3}/{}", cnt.errors_s, cnt.elements_s);
                }
                if cnt.erased_blocks > 0 {
                    s.push_str(" erased");
                }
                if cnt.flagged_blocks > 0 {
                    s.push_str(" flagged");
                }
                s.push('\n');
            }
        }
    }
    Ok(s)
}
