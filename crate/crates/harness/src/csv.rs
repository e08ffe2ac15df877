//! BER records and their CSV form.

use std::io::{BufRead, Write};

use crate::error::{HarnessError, Result};
use crate::spec::{PhaseMode, Scheme};
use crate::stats::wilson_half_width;

pub const CSV_HEADER: &str =
    "snr_db,rho,scheme,phase_mode,ber_x,ber_s,bit_count_x,bit_count_s,erased_blocks,trials,seed";

/// Aggregated result for one `(SNR, ρ, scheme)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub snr_db: f64,
    pub rho: f64,
    pub scheme: Scheme,
    pub phase_mode: PhaseMode,
    /// Absent when the scheme does not estimate `x`.
    pub ber_x: Option<f64>,
    /// Absent when the scheme does not estimate `s`.
    pub ber_s: Option<f64>,
    pub bit_count_x: u64,
    pub bit_count_s: u64,
    pub erased_blocks: u64,
    pub trials: u64,
    pub seed: u64,
}

impl BerRecord {
    pub fn errors_x(&self) -> u64 {
        self.ber_x.map_or(0, |b| (b * self.bit_count_x as f64).round() as u64)
    }

    pub fn errors_s(&self) -> u64 {
        self.ber_s.map_or(0, |b| (b * self.bit_count_s as f64).round() as u64)
    }

    /// 95% Wilson half-width of `ber_x`.
    pub fn half_width_x(&self) -> Option<f64> {
        self.ber_x.map(|_| wilson_half_width(self.errors_x(), self.bit_count_x))
    }

    pub fn half_width_s(&self) -> Option<f64> {
        self.ber_s.map(|_| wilson_half_width(self.errors_s(), self.bit_count_s))
    }

    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            format_sig(self.snr_db),
            format_sig(self.rho),
            self.scheme,
            self.phase_mode,
            opt(self.ber_x),
            opt(self.ber_s),
            self.bit_count_x,
            self.bit_count_s,
            self.erased_blocks,
            self.trials,
            self.seed
        )
    }

    pub fn from_csv_line(line: &str, line_no: usize) -> Result<Self> {
        let bad = |msg: String| HarnessError::Csv { line: line_no, msg };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(bad(format!("expected 11 fields, got {}", fields.len())));
        }
        let real = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
        let count = |s: &str| s.parse::<u64>().map_err(|e| bad(format!("{s:?}: {e}")));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { real(s).map(Some) };
        Ok(Self {
            snr_db: real(fields[0])?,
            rho: real(fields[1])?,
            scheme: fields[2].parse()?,
            phase_mode: fields[3].parse()?,
            ber_x: opt(fields[4])?,
            ber_s: opt(fields[5])?,
            bit_count_x: count(fields[6])?,
            bit_count_s: count(fields[7])?,
            erased_blocks: count(fields[8])?,
            trials: count(fields[9])?,
            seed: count(fields[10])?,
        })
    }
}

/// Shortest decimal rendering of `v` rounded to 8 significant digits.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.7e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..8).contains(&exp) {
        let decimals = (7 - exp).max(0) as usize;
        let rounded: f64 = s.parse().expect("own output");
        trim_zeros(format!("{rounded:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_csv<W: Write>(records: &[BerRecord], mut w: W) -> std::io::Result<()> {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    w.write_all(out.as_bytes())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<BerRecord>> {
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == CSV_HEADER => {}
        Some((_, Ok(h))) => return Err(HarnessError::Csv { line: 1, msg: format!("unexpected header {h:?}") }),
        Some((_, Err(e))) => return Err(HarnessError::Csv { line: 1, msg: e.to_string() }),
        None => return Err(HarnessError::Csv { line: 1, msg: "empty file".into() }),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| HarnessError::Csv { line: i + 1, msg: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(BerRecord::from_csv_line(line.trim(), i + 1)?);
    }
    Ok(out)
}
