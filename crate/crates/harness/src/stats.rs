//! Binomial confidence intervals and BER curve helpers.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `errors` out of `total` at normal quantile `z`.
/// An empty sample gives the whole unit interval.
pub fn wilson_interval(errors: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors >= total { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Half the width of the 95% Wilson interval.
pub fn wilson_half_width(errors: u64, total: u64) -> f64 {
    let (lo, hi) = wilson_interval(errors, total, Z95);
    0.5 * (hi - lo)
}

/// `|p_a − p_b|` measured in combined 95% Wilson half-widths. Zero when
/// both estimates coincide.
pub fn separation(a: (u64, u64), b: (u64, u64)) -> f64 {
    let pa = a.0 as f64 / a.1.max(1) as f64;
    let pb = b.0 as f64 / b.1.max(1) as f64;
    let ha = wilson_half_width(a.0, a.1);
    let hb = wilson_half_width(b.0, b.1);
    let scale = (ha * ha + hb * hb).sqrt();
    if pa == pb {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        (pa - pb).abs() / scale
    }
}

/// One point of a BER curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub errors: u64,
    pub total: u64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        self.errors as f64 / self.total.max(1) as f64
    }

    /// BER with a half-error floor so zero counts stay on a log axis.
    fn log_ber(&self) -> f64 {
        let e = if self.errors == 0 { 0.5 } else { self.errors as f64 };
        (e / self.total.max(1) as f64).log10()
    }
}

/// SNR at which the curve first drops below `target`, interpolating
/// `log10 BER` linearly in dB between the bracketing points. `None` when
/// the curve starts below the target or never reaches it.
pub fn snr_at_ber(points: &[BerPoint], target: f64) -> Option<f64> {
    let first = points.first()?;
    if first.ber() < target {
        return None;
    }
    let lt = target.log10();
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if a.ber() >= target && b.ber() < target {
            let (la, lb) = (a.log_ber(), b.log_ber().min(lt));
            let frac = if la == lb { 1.0 } else { (la - lt) / (la - lb) };
            Some(a.snr_db + frac.clamp(0.0, 1.0) * (b.snr_db - a.snr_db))
        } else {
            None
        }
    })
}
