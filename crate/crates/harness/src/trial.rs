//! One Monte Carlo realization: draw everything, run every requested
//! receiver at every grid point, count errors.

use std::ops::AddAssign;

use pbit_core::beamform::{optimize_phases, BeamformOptions};
use pbit_core::model::{
    effective_channel, modulate, random_bits, received_block, sample_channels, sample_lis_state, symbols_to_bits,
    unit_noise, ChannelState, PhaseShifts, Purpose, StreamFactory, SystemConfig,
};
use pbit_core::rx_factor::{estimate_bigamp, estimate_svd, BigAmpOptions, FactorEstimate, FactorPriors};
use pbit_core::rx_sparse::{
    cosamp_recover, form_observation, gamp_recover, lower_bound_s, lower_bound_x, omp_recover, GampOptions,
    SparseEstimate,
};
use pbit_core::{CMat, CVec};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::spec::{ExperimentSpec, PhaseMode, Scheme};

/// CoSaMP iteration cap.
pub const COSAMP_MAX_ITER: usize = 50;

/// Error tallies for one scheme at one grid point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub bit_errors_x: u64,
    pub bits_x: u64,
    pub errors_s: u64,
    pub elements_s: u64,
    /// Blocks whose scale ambiguity could not be removed; all their bits
    /// are counted as errors.
    pub erased_blocks: u64,
    /// Blocks where BiG-AMP diverged and the SVD factors were used.
    pub flagged_blocks: u64,
}

impl AddAssign for ErrorCounts {
    fn add_assign(&mut self, o: Self) {
        self.bit_errors_x += o.bit_errors_x;
        self.bits_x += o.bits_x;
        self.errors_s += o.errors_s;
        self.elements_s += o.elements_s;
        self.erased_blocks += o.erased_blocks;
        self.flagged_blocks += o.flagged_blocks;
    }
}

/// Counts over the whole `ρ × SNR × scheme` grid, row-major in that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCounts {
    pub n_rho: usize,
    pub n_snr: usize,
    pub n_schemes: usize,
    pub counts: Vec<ErrorCounts>,
}

impl GridCounts {
    pub fn zeros(spec: &ExperimentSpec) -> Self {
        let (n_rho, n_snr, n_schemes) = (spec.rho_grid.len(), spec.snr_grid_db.len(), spec.schemes.len());
        Self {
            n_rho,
            n_snr,
            n_schemes,
            counts: vec![ErrorCounts::default(); n_rho * n_snr * n_schemes],
        }
    }

    fn index(&self, rho: usize, snr: usize, scheme: usize) -> usize {
        (rho * self.n_snr + snr) * self.n_schemes + scheme
    }

    pub fn get(&self, rho: usize, snr: usize, scheme: usize) -> ErrorCounts {
        self.counts[self.index(rho, snr, scheme)]
    }

    pub fn get_mut(&mut self, rho: usize, snr: usize, scheme: usize) -> &mut ErrorCounts {
        let i = self.index(rho, snr, scheme);
        &mut self.counts[i]
    }

    pub fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += *b;
        }
        self
    }
}

/// Everything drawn for one trial at one `ρ`. Channels, payload and the
/// unit noise depend only on the trial; the LIS state uses the same
/// uniforms for every `ρ`, so neighbouring `ρ` values see coupled states.
#[derive(Debug, Clone)]
pub struct TrialContext {
    pub cfg: SystemConfig,
    /// Channels with `A` set for the chosen phases.
    pub channels: ChannelState,
    pub phases: PhaseShifts,
    /// Expected gain of the chosen phases (including `‖h_d‖²`).
    pub expected_gain: f64,
    pub s: Vec<u8>,
    pub bits: Vec<u8>,
    pub x: CVec,
    pub z: CVec,
    pub unit_noise: CMat,
}

impl TrialContext {
    pub fn draw(spec: &ExperimentSpec, trial: u64, rho_index: usize) -> Result<Self> {
        let factory = StreamFactory::new(spec.master_seed);
        let rho = spec.rho_grid[rho_index];
        let cfg = spec.cfg.clone().with_rho(rho)?;
        let base = sample_channels(&cfg, &mut factory.stream(trial, Purpose::Channel));
        let s = sample_lis_state(&cfg, &mut factory.stream(trial, Purpose::LisState));
        let bits = random_bits(cfg.payload_bits(), &mut factory.stream(trial, Purpose::Payload));
        let x = modulate(&bits, &cfg)?;
        let noise = unit_noise(cfg.m, cfg.l, &mut factory.stream(trial, Purpose::Noise));

        let (phases, expected_gain) = match spec.phase_mode {
            PhaseMode::Random => {
                let p = PhaseShifts::random(cfg.n, &mut factory.stream(trial, Purpose::RandomPhases));
                let g = pbit_core::beamform::expected_gain(&p, &base, rho, cfg.beta)?;
                (p, g)
            }
            PhaseMode::Optimized => {
                let mut rng = factory.stream_with_tag(trial, Purpose::Rounding, rho_index as u32);
                let out = optimize_phases(&base, rho, cfg.beta, &BeamformOptions::default(), &mut rng)?;
                (out.phases, out.expected_gain)
            }
        };
        let channels = base.with_phases(&phases, cfg.beta)?;
        let z = effective_channel(&channels, &s)?;
        Ok(Self {
            cfg,
            channels,
            phases,
            expected_gain,
            s,
            bits,
            x,
            z,
            unit_noise: noise,
        })
    }

    /// Received block at the given noise variance.
    pub fn observe(&self, noise_var: f64) -> CMat {
        received_block(&self.z, &self.x, &self.unit_noise, noise_var)
    }

    /// Runs `schemes` on one received block at noise variance `noise_var`.
    pub fn evaluate(
        &self,
        schemes: &[Scheme],
        noise_var: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<(Scheme, ErrorCounts)>> {
        let cfg = self.cfg.clone().with_noise_var(noise_var)?;
        let y = self.observe(noise_var);
        let a = self.channels.a().expect("phases are applied in draw");
        let h_d = &self.channels.h_d;
        let gamp = GampOptions::default();
        let k = (cfg.rho * cfg.n as f64).round() as usize;

        let mut svd: Option<Option<FactorEstimate>> = None;
        let mut bigamp: Option<Option<FactorEstimate>> = None;
        let mut out = Vec::with_capacity(schemes.len());
        for &scheme in schemes {
            let counts = match scheme {
                Scheme::NoLis => {
                    let y0 = received_block(h_d, &self.x, &self.unit_noise, noise_var);
                    let x_tilde = lower_bound_x(&y0, h_d, &cfg.constellation);
                    self.count_x(&cfg, Some(&x_tilde))
                }
                Scheme::LbX => {
                    let x_tilde = lower_bound_x(&y, &self.z, &cfg.constellation);
                    self.count_x(&cfg, Some(&x_tilde))
                }
                Scheme::LbS => {
                    let est = lower_bound_s(&y, &self.x, &cfg, a, h_d, &gamp)?;
                    self.count_s(Some(&est))
                }
                Scheme::Svd | Scheme::SvdGamp => {
                    let f = svd.get_or_insert_with(|| estimate_svd(&y, cfg.reference_symbol, &cfg.constellation).ok());
                    let mut c = self.count_x(&cfg, f.as_ref().map(|e| &e.x_tilde));
                    if scheme == Scheme::SvdGamp {
                        c += self.recover_s(&y, &cfg, f.as_ref(), |obs| gamp_recover(obs, cfg.rho, &gamp))?;
                    }
                    c
                }
                Scheme::BigAmp | Scheme::BigAmpGamp | Scheme::BigAmpOmp | Scheme::BigAmpCosamp => {
                    if bigamp.is_none() {
                        let priors = FactorPriors::from_model(
                            a,
                            h_d,
                            cfg.rho,
                            cfg.constellation.clone(),
                            cfg.reference_symbol,
                            cfg.noise_var,
                        )?;
                        bigamp = Some(estimate_bigamp(&y, &priors, &BigAmpOptions::default(), rng).ok());
                    }
                    let f = bigamp.as_ref().and_then(|v| v.as_ref());
                    let mut c = self.count_x(&cfg, f.map(|e| &e.x_tilde));
                    c.flagged_blocks = u64::from(f.is_some_and(|e| e.flagged));
                    c += match scheme {
                        Scheme::BigAmpGamp => self.recover_s(&y, &cfg, f, |obs| gamp_recover(obs, cfg.rho, &gamp))?,
                        Scheme::BigAmpOmp => self.recover_s(&y, &cfg, f, |obs| omp_recover(obs, k))?,
                        Scheme::BigAmpCosamp => {
                            self.recover_s(&y, &cfg, f, |obs| cosamp_recover(obs, k, COSAMP_MAX_ITER))?
                        }
                        _ => ErrorCounts::default(),
                    };
                    c
                }
            };
            out.push((scheme, counts));
        }
        Ok(out)
    }

    fn count_x(&self, cfg: &SystemConfig, x_tilde: Option<&CVec>) -> ErrorCounts {
        let bits_x = self.bits.len() as u64;
        match x_tilde {
            Some(x) => {
                let decided = symbols_to_bits(x, &cfg.constellation);
                let errors = decided.iter().zip(&self.bits).filter(|(a, b)| a != b).count() as u64;
                ErrorCounts {
                    bit_errors_x: errors,
                    bits_x,
                    ..Default::default()
                }
            }
            None => ErrorCounts {
                bit_errors_x: bits_x,
                bits_x,
                erased_blocks: 1,
                ..Default::default()
            },
        }
    }

    fn count_s(&self, est: Option<&SparseEstimate>) -> ErrorCounts {
        let n = self.s.len() as u64;
        let errors = match est {
            Some(e) => e.s_hat.iter().zip(&self.s).filter(|(a, b)| a != b).count() as u64,
            None => n,
        };
        ErrorCounts {
            errors_s: errors,
            elements_s: n,
            ..Default::default()
        }
    }

    fn recover_s<F>(&self, y: &CMat, cfg: &SystemConfig, factor: Option<&FactorEstimate>, recover: F) -> Result<ErrorCounts>
    where
        F: FnOnce(&pbit_core::rx_sparse::SparseObservation) -> pbit_core::Result<SparseEstimate>,
    {
        let Some(f) = factor else {
            return Ok(self.count_s(None));
        };
        let a = self.channels.a().expect("phases are applied in draw");
        let obs = form_observation(y, &f.x_tilde, cfg, a, &self.channels.h_d)?;
        Ok(self.count_s(Some(&recover(&obs)?)))
    }
}

/// Every grid point of one trial.
pub fn run_trial(spec: &ExperimentSpec, trial: u64) -> Result<GridCounts> {
    let factory = StreamFactory::new(spec.master_seed);
    let mut grid = GridCounts::zeros(spec);
    for rho_index in 0..spec.rho_grid.len() {
        let ctx = TrialContext::draw(spec, trial, rho_index)?;
        for (snr_index, &snr) in spec.snr_grid_db.iter().enumerate() {
            let tag = ((rho_index as u32) << 16) | snr_index as u32;
            let mut rng = factory.stream_with_tag(trial, Purpose::Receiver, tag);
            let noise_var = pbit_core::model::snr_db_to_noise_var(snr);
            for (scheme_index, (_, c)) in ctx.evaluate(&spec.schemes, noise_var, &mut rng)?.into_iter().enumerate() {
                *grid.get_mut(rho_index, snr_index, scheme_index) = c;
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            cfg: SystemConfig::new(8, 6, 20, 0.5, 0.5, 1.0, 1.0).unwrap(),
            snr_grid_db: vec![-5.0, 10.0],
            rho_grid: vec![0.5, 0.9],
            schemes: Scheme::ALL.to_vec(),
            phase_mode: PhaseMode::Random,
            trials: 4,
            master_seed: 5,
            output_path: String::new(),
        }
    }

    #[test]
    fn deterministic_per_trial() {
        let spec = small_spec();
        assert_eq!(run_trial(&spec, 3).unwrap(), run_trial(&spec, 3).unwrap());
        assert_ne!(run_trial(&spec, 3).unwrap(), run_trial(&spec, 4).unwrap());
    }

    #[test]
    fn bit_bookkeeping() {
        let spec = small_spec();
        let g = run_trial(&spec, 0).unwrap();
        for r in 0..2 {
            for s in 0..2 {
                for (k, scheme) in spec.schemes.iter().enumerate() {
                    let c = g.get(r, s, k);
                    assert_eq!(c.bits_x, if scheme.has_x() { 38 } else { 0 });
                    assert_eq!(c.elements_s, if scheme.has_s() { 6 } else { 0 });
                    assert!(c.bit_errors_x <= c.bits_x && c.errors_s <= c.elements_s);
                }
            }
        }
    }

    #[test]
    fn noiseless_is_error_free_for_exact_receivers() {
        let mut spec = small_spec();
        spec.snr_grid_db = vec![f64::INFINITY];
        spec.schemes = vec![Scheme::NoLis, Scheme::Svd, Scheme::BigAmp, Scheme::LbX, Scheme::SvdGamp, Scheme::BigAmpGamp, Scheme::LbS];
        for trial in 0..5 {
            let g = run_trial(&spec, trial).unwrap();
            for c in &g.counts {
                assert_eq!((c.bit_errors_x, c.errors_s, c.erased_blocks), (0, 0, 0));
            }
        }
    }

    #[test]
    fn lis_state_is_coupled_across_rho() {
        let spec = small_spec();
        let lo = TrialContext::draw(&spec, 2, 0).unwrap();
        let hi = TrialContext::draw(&spec, 2, 1).unwrap();
        assert!(lo.s.iter().zip(&hi.s).all(|(a, b)| a <= b));
        assert_eq!(lo.x, hi.x);
        assert_eq!(lo.unit_noise, hi.unit_noise);
    }

    #[test]
    fn optimized_phases_raise_expected_gain() {
        let mut spec = small_spec();
        let random = TrialContext::draw(&spec, 1, 0).unwrap();
        spec.phase_mode = PhaseMode::Optimized;
        let opt = TrialContext::draw(&spec, 1, 0).unwrap();
        assert!(opt.expected_gain > random.expected_gain);
        assert_eq!(opt.s, random.s);
    }
}
