//! Phase-shift design maximizing the average receive gain.
//!
//! Pipeline: [`build_qcqp`] → [`solve_sdp`] → [`randomized_rounding`].
//! `β` is folded into the cascaded channel before anything is assembled, so
//! all objectives here are in the units of the physical model.

mod objective;
mod rounding;
mod sdp;

use std::io::{Read, Write};

use rand::Rng;

pub use objective::{build_qcqp, expected_gain, QcqpData};
pub use rounding::{randomized_rounding, RoundingOutcome};
pub use sdp::{dual_bound, solve_sdp, SdpOptions, SdpResiduals, SdpSolution};

use crate::model::{ChannelState, PhaseShifts};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamformOptions {
    pub sdp: SdpOptions,
    /// Gaussian randomization draws.
    pub rounding_trials: usize,
}

impl Default for BeamformOptions {
    fn default() -> Self {
        Self {
            sdp: SdpOptions::default(),
            rounding_trials: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformOutcome {
    pub phases: PhaseShifts,
    /// Average gain (including `‖h_d‖²`) at the returned phases.
    pub expected_gain: f64,
    /// SDP optimum plus `‖h_d‖²`: an upper bound on any unit-modulus design.
    pub upper_bound: f64,
    pub sdp: SdpSolution,
}

pub fn optimize_phases<R: Rng + ?Sized>(
    ch: &ChannelState,
    rho: f64,
    beta: f64,
    opts: &BeamformOptions,
    rng: &mut R,
) -> Result<BeamformOutcome> {
    let q = build_qcqp(ch, rho, beta);
    let sdp = solve_sdp(&q.combined(), &opts.sdp)?;
    let rounded = randomized_rounding(&sdp, &q, opts.rounding_trials, rng)?;
    let gain = expected_gain(&rounded.phases, ch, rho, beta)?;
    Ok(BeamformOutcome {
        phases: rounded.phases,
        expected_gain: gain,
        upper_bound: sdp.dual_bound.max(sdp.objective) + q.constant,
        sdp,
    })
}

/// One phase per line in radians, 12 significant digits.
pub fn write_phases<W: Write>(phases: &PhaseShifts, mut w: W) -> Result<()> {
    let mut out = String::new();
    for a in phases.angles() {
        out.push_str(&format!("{a:.11e}\n"));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_phases<R: Read>(mut r: R) -> Result<PhaseShifts> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let angles = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad phase {t:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if angles.is_empty() {
        return Err(Error::Parse("no phases found".into()));
    }
    Ok(PhaseShifts::from_angles(&angles))
}
