//! Experiment description and its flat `key = value` file format.

use std::fmt;
use std::str::FromStr;

use pbit_core::model::{snr_db_to_noise_var, SystemConfig};

use crate::error::{HarnessError, Result};

/// Receiver variants that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    NoLis,
    Svd,
    BigAmp,
    LbX,
    SvdGamp,
    BigAmpGamp,
    BigAmpOmp,
    BigAmpCosamp,
    LbS,
}

impl Scheme {
    pub const ALL: [Scheme; 9] = [
        Scheme::NoLis,
        Scheme::Svd,
        Scheme::BigAmp,
        Scheme::LbX,
        Scheme::SvdGamp,
        Scheme::BigAmpGamp,
        Scheme::BigAmpOmp,
        Scheme::BigAmpCosamp,
        Scheme::LbS,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::NoLis => "no-lis",
            Scheme::Svd => "svd",
            Scheme::BigAmp => "bigamp",
            Scheme::LbX => "lb-x",
            Scheme::SvdGamp => "svd+gamp",
            Scheme::BigAmpGamp => "bigamp+gamp",
            Scheme::BigAmpOmp => "bigamp+omp",
            Scheme::BigAmpCosamp => "bigamp+cosamp",
            Scheme::LbS => "lb-s",
        }
    }

    /// Whether the scheme produces a symbol estimate.
    pub fn has_x(self) -> bool {
        !matches!(self, Scheme::LbS)
    }

    /// Whether the scheme produces an LIS state estimate.
    pub fn has_s(self) -> bool {
        matches!(
            self,
            Scheme::SvdGamp | Scheme::BigAmpGamp | Scheme::BigAmpOmp | Scheme::BigAmpCosamp | Scheme::LbS
        )
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Scheme::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| HarnessError::UnknownScheme(s.to_string()))
    }
}

/// Parses a comma separated scheme list, dropping duplicates and sorting
/// into canonical order.
pub fn parse_schemes(text: &str) -> Result<Vec<Scheme>> {
    let mut out = text
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(Scheme::from_str)
        .collect::<Result<Vec<_>>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseMode {
    /// i.i.d. uniform phases per trial.
    Random,
    /// SDR design per trial.
    Optimized,
}

impl PhaseMode {
    pub fn tag(self) -> &'static str {
        match self {
            PhaseMode::Random => "random",
            PhaseMode::Optimized => "optimized",
        }
    }
}

impl fmt::Display for PhaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PhaseMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "random" => Ok(PhaseMode::Random),
            "optimized" => Ok(PhaseMode::Optimized),
            other => Err(HarnessError::UnknownPhaseMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Base link parameters. `noise_var` and `rho` are overridden by the
    /// grids.
    pub cfg: SystemConfig,
    pub snr_grid_db: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub phase_mode: PhaseMode,
    pub trials: u64,
    pub master_seed: u64,
    pub output_path: String,
}

impl ExperimentSpec {
    /// M = N = 32, L = 100, β = 0.5, ρ = 0.5, P = 1, every scheme, optimized
    /// phases, SNR from −20 to 0 dB in 2 dB steps.
    pub fn reference() -> Self {
        Self {
            cfg: SystemConfig::reference_setup(0.0),
            snr_grid_db: (0..=10).map(|k| -20.0 + 2.0 * f64::from(k)).collect(),
            rho_grid: vec![0.5],
            schemes: Scheme::ALL.to_vec(),
            phase_mode: PhaseMode::Optimized,
            trials: 100,
            master_seed: 1,
            output_path: "pbit.csv".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.trials == 0 {
            return Err(HarnessError::Invalid("trials must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(HarnessError::Invalid("SNR grid is empty".into()));
        }
        if self.snr_grid_db.iter().any(|v| v.is_nan()) {
            return Err(HarnessError::Invalid("SNR grid contains NaN".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarnessError::Invalid("SNR grid must be strictly increasing".into()));
        }
        if self.rho_grid.is_empty() {
            return Err(HarnessError::Invalid("rho grid is empty".into()));
        }
        for &rho in &self.rho_grid {
            self.cfg.clone().with_rho(rho)?;
        }
        if self.schemes.is_empty() {
            return Err(HarnessError::Invalid("no schemes selected".into()));
        }
        Ok(())
    }

    /// Link parameters at one grid point.
    pub fn point_config(&self, snr_db: f64, rho: f64) -> Result<SystemConfig> {
        Ok(self
            .cfg
            .clone()
            .with_rho(rho)?
            .with_noise_var(snr_db_to_noise_var(snr_db))?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = Self::reference();
        let mut rho_grid_set = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Config {
                line: line_no,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |msg: String| HarnessError::Config { line: line_no, msg };
            match key {
                "m" => spec.cfg.m = parse_num(value).map_err(bad)?,
                "n" => spec.cfg.n = parse_num(value).map_err(bad)?,
                "l" => spec.cfg.l = parse_num(value).map_err(bad)?,
                "beta" => spec.cfg.beta = parse_num(value).map_err(bad)?,
                "rho" => spec.cfg.rho = parse_num(value).map_err(bad)?,
                "power" => {
                    let power: f64 = parse_num(value).map_err(bad)?;
                    spec.cfg = SystemConfig::new(
                        spec.cfg.m,
                        spec.cfg.n,
                        spec.cfg.l,
                        spec.cfg.beta,
                        spec.cfg.rho,
                        power,
                        spec.cfg.noise_var,
                    )?;
                }
                "snr_grid_db" => spec.snr_grid_db = parse_grid(value).map_err(bad)?,
                "rho_grid" => {
                    spec.rho_grid = parse_grid(value).map_err(bad)?;
                    rho_grid_set = true;
                }
                "schemes" => spec.schemes = parse_schemes(value)?,
                "phase_mode" => spec.phase_mode = value.parse()?,
                "trials" => spec.trials = parse_num(value).map_err(bad)?,
                "master_seed" => spec.master_seed = parse_num(value).map_err(bad)?,
                "output_path" => spec.output_path = value.to_string(),
                other => return Err(HarnessError::UnknownKey(other.to_string())),
            }
        }
        if !rho_grid_set {
            spec.rho_grid = vec![spec.cfg.rho];
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Inverse of [`parse`](Self::parse).
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        let schemes = self.schemes.iter().map(|s| s.tag()).collect::<Vec<_>>().join(", ");
        format!(
            "m = {}\nn = {}\nl = {}\nbeta = {}\nrho = {}\npower = {}\nsnr_grid_db = {}\nrho_grid = {}\nschemes = {}\nphase_mode = {}\ntrials = {}\nmaster_seed = {}\noutput_path = {}\n",
            self.cfg.m,
            self.cfg.n,
            self.cfg.l,
            self.cfg.beta,
            self.cfg.rho,
            self.cfg.power,
            list(&self.snr_grid_db),
            list(&self.rho_grid),
            schemes,
            self.phase_mode,
            self.trials,
            self.master_seed,
            self.output_path,
        )
    }
}

fn parse_num<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("cannot parse {value:?}: {e}"))
}

/// Comma separated reals, where an item may also be `start:step:stop`
/// (inclusive).
pub fn parse_grid(value: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [single] => out.push(parse_num(single.trim())?),
            [start, step, stop] => {
                let start: f64 = parse_num(start.trim())?;
                let step: f64 = parse_num(step.trim())?;
                let stop: f64 = parse_num(stop.trim())?;
                if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
                    return Err(format!("bad range {item:?}"));
                }
                let count = ((stop - start) / step + 1e-9).floor();
                if count < 0.0 {
                    return Err(format!("empty range {item:?}"));
                }
                for k in 0..=count as usize {
                    // round away accumulated binary noise, e.g. 0.1 * 3
                    let v = start + step * k as f64;
                    out.push((v * 1e9).round() / 1e9);
                }
            }
            _ => return Err(format!("bad grid item {item:?}")),
        }
    }
    if out.is_empty() {
        return Err("empty grid".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_tags_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.tag().parse::<Scheme>().unwrap(), s);
        }
        assert!("bigamp+lasso".parse::<Scheme>().is_err());
        assert_eq!(parse_schemes("lb-s, svd,svd").unwrap(), vec![Scheme::Svd, Scheme::LbS]);
    }

    #[test]
    fn outputs_per_scheme() {
        assert!(Scheme::LbX.has_x() && !Scheme::LbX.has_s());
        assert!(!Scheme::LbS.has_x() && Scheme::LbS.has_s());
        assert!(Scheme::BigAmpOmp.has_x() && Scheme::BigAmpOmp.has_s());
        assert!(!Scheme::NoLis.has_s());
    }

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("-2:1:1").unwrap(), vec![-2.0, -1.0, 0.0, 1.0]);
        assert_eq!(parse_grid("0.5:0.1:1").unwrap(), vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
        assert_eq!(parse_grid("1, 3:1:4, inf").unwrap(), vec![1.0, 3.0, 4.0, f64::INFINITY]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("a").is_err());
    }

    #[test]
    fn parse_round_trip() {
        let text = "# demo\nm = 8\nn = 4\nl = 20\nbeta=0.5\nrho = 0.7\nsnr_grid_db = -10:5:0\nschemes = bigamp, lb-s\nphase_mode = random\ntrials = 3\nmaster_seed = 9\noutput_path = out.csv\n";
        let spec = ExperimentSpec::parse(text).unwrap();
        assert_eq!(spec.cfg.m, 8);
        assert_eq!(spec.rho_grid, vec![0.7]);
        assert_eq!(spec.snr_grid_db, vec![-10.0, -5.0, 0.0]);
        assert_eq!(spec.schemes, vec![Scheme::BigAmp, Scheme::LbS]);
        assert_eq!(spec.phase_mode, PhaseMode::Random);
        assert_eq!(ExperimentSpec::parse(&spec.to_text()).unwrap(), spec);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(ExperimentSpec::parse("colour = red"), Err(HarnessError::UnknownKey(_))));
        assert!(matches!(ExperimentSpec::parse("m 3"), Err(HarnessError::Config { line: 1, .. })));
        assert!(ExperimentSpec::parse("trials = 0").is_err());
        assert!(ExperimentSpec::parse("snr_grid_db = 0, -1").is_err());
        assert!(ExperimentSpec::parse("rho_grid = 0.5, 1.5").is_err());
        assert!(ExperimentSpec::parse("schemes = ").is_err());
        assert!(ExperimentSpec::parse("phase_mode = best").is_err());
    }
}
