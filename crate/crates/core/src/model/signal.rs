use rand::Rng;

use super::{ChannelState, Constellation, PhaseShifts, SystemConfig};
use crate::linalg::complex_normal_mat;
use crate::{CMat, CVec, Error, Result, C64};

/// One transmission block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSignals {
    /// LIS on/off pattern.
    pub s: Vec<u8>,
    /// User symbols, `x[0]` is the reference symbol.
    pub x: CVec,
    /// Received block, `M × L`.
    pub y: CMat,
    /// `z = A s + h_d`.
    pub z: CVec,
}

/// I.i.d. Bernoulli(ρ) element states.
pub fn sample_lis_state<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Vec<u8> {
    (0..cfg.n)
        .map(|_| u8::from(rng.random::<f64>() < cfg.rho))
        .collect()
}

pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| u8::from(rng.random::<bool>())).collect()
}

/// Maps `(L-1)·log2|C|` bits onto slots 2..L; slot 1 carries the reference.
pub fn modulate(bits: &[u8], cfg: &SystemConfig) -> Result<CVec> {
    let expected = cfg.payload_bits();
    if bits.len() != expected {
        return Err(Error::BitLength {
            expected,
            got: bits.len(),
        });
    }
    let k = cfg.constellation.bits_per_symbol();
    let mut x = CVec::zeros(cfg.l);
    x[0] = cfg.reference_symbol;
    for (slot, chunk) in bits.chunks(k).enumerate() {
        x[slot + 1] = map_symbol(chunk, &cfg.constellation)?;
    }
    Ok(x)
}

fn map_symbol(chunk: &[u8], c: &Constellation) -> Result<C64> {
    let mut label = 0u32;
    for &b in chunk {
        if b > 1 {
            return Err(Error::Parse(format!("bit value {b} is not 0 or 1")));
        }
        label = (label << 1) | u32::from(b);
    }
    Ok(c.point_for_label(label).expect("every label has a point"))
}

/// Inverse of [`modulate`] for symbols already on the constellation
/// (slot 1 skipped); off-grid values are sliced to the nearest point.
pub fn symbols_to_bits(x: &CVec, c: &Constellation) -> Vec<u8> {
    let k = c.bits_per_symbol();
    let mut out = Vec::with_capacity(x.len().saturating_sub(1) * k);
    for v in x.iter().skip(1) {
        let label = c.labels()[c.nearest_index(*v)];
        for b in (0..k).rev() {
            out.push(((label >> b) & 1) as u8);
        }
    }
    out
}

/// `z = A s + h_d` with `A` taken from `ch` (phases must already be set).
pub fn effective_channel(ch: &ChannelState, s: &[u8]) -> Result<CVec> {
    let a = ch
        .a()
        .ok_or_else(|| Error::InvalidConfig("phases not applied to channel".into()))?;
    if s.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            what: "LIS state length",
            expected: a.ncols(),
            got: s.len(),
        });
    }
    let sv = CVec::from_iterator(s.len(), s.iter().map(|&b| C64::new(f64::from(b), 0.0)));
    Ok(a * sv + &ch.h_d)
}

/// Unit-variance noise for a block; scale by `σ_w` to reuse it across SNRs.
pub fn unit_noise<R: Rng + ?Sized>(m: usize, l: usize, rng: &mut R) -> CMat {
    complex_normal_mat(rng, m, l, 1.0)
}

/// `Y = z xᵀ + σ_w · W₀`.
pub fn received_block(z: &CVec, x: &CVec, unit_noise: &CMat, noise_var: f64) -> CMat {
    let mut y = z * x.transpose();
    if noise_var > 0.0 {
        y += unit_noise.scale(noise_var.sqrt());
    }
    y
}

/// Synthesizes one block `Y = (A s + h_d) xᵀ + W`, `W ~ CN(0, σ_w²)`.
pub fn simulate_block<R: Rng + ?Sized>(
    ch: &ChannelState,
    phases: &PhaseShifts,
    s: &[u8],
    x: &CVec,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<BlockSignals> {
    for (index, v) in phases.theta().iter().enumerate() {
        let modulus = v.norm();
        if (modulus - 1.0).abs() > super::UNIT_MODULUS_TOL {
            return Err(Error::NonUnitModulus { index, modulus });
        }
    }
    if s.iter().any(|&b| b > 1) {
        return Err(Error::InvalidConfig("LIS state must be binary".into()));
    }
    if x.len() != cfg.l {
        return Err(Error::DimensionMismatch {
            what: "symbol vector length",
            expected: cfg.l,
            got: x.len(),
        });
    }
    let ch = ch.clone().with_phases(phases, cfg.beta)?;
    let z = effective_channel(&ch, s)?;
    let w0 = unit_noise(cfg.m, cfg.l, rng);
    let y = received_block(&z, x, &w0, cfg.noise_var);
    Ok(BlockSignals {
        s: s.to_vec(),
        x: x.clone(),
        y,
        z,
    })
}
