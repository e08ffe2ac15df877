//! Flat channel dumps for cross-implementation regression.
//!
//! Text layout:
//!
//! ```text
//! pbit-channel <M> <N> <L>
//! <G row 1: re im re im ...>        (M lines, N pairs each)
//! <h_r: re im ...>                  (N pairs)
//! <h_d: re im ...>                  (M pairs)
//! ```
//!
//! Binary layout: magic `PBCH`, then `M`, `N`, `L` as little-endian `u64`,
//! then the same values as little-endian `f64` in the same order.

use std::io::{Read, Write};

use super::ChannelState;
use crate::{CMat, CVec, Error, Result, C64};

const TEXT_TAG: &str = "pbit-channel";
const MAGIC: &[u8; 4] = b"PBCH";

fn push_pairs(out: &mut String, vals: impl Iterator<Item = C64>) {
    let mut first = true;
    for v in vals {
        if !first {
            out.push(' ');
        }
        first = false;
        out.push_str(&format!("{:e} {:e}", v.re, v.im));
    }
    out.push('\n');
}

pub fn write_text<W: Write>(ch: &ChannelState, block_len: usize, mut w: W) -> Result<()> {
    let (m, n) = (ch.m(), ch.n());
    let mut out = format!("{TEXT_TAG} {m} {n} {block_len}\n");
    for i in 0..m {
        push_pairs(&mut out, (0..n).map(|j| ch.g[(i, j)]));
    }
    push_pairs(&mut out, ch.h_r.iter().copied());
    push_pairs(&mut out, ch.h_d.iter().copied());
    w.write_all(out.as_bytes())?;
    Ok(())
}

fn parse_pairs(line: Option<&str>, expected: usize, what: &str) -> Result<Vec<C64>> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing {what} line")))?;
    let nums = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Parse(format!("{what}: bad number {t:?}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if nums.len() != 2 * expected {
        return Err(Error::Parse(format!(
            "{what}: expected {} numbers, found {}",
            2 * expected,
            nums.len()
        )));
    }
    Ok(nums.chunks(2).map(|p| C64::new(p[0], p[1])).collect())
}

/// Returns the channel and the block length `L` stored in the header.
pub fn read_text<R: Read>(mut r: R) -> Result<(ChannelState, usize)> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty channel dump".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != TEXT_TAG {
        return Err(Error::Parse(format!("bad channel header {header:?}")));
    }
    let dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad dimension {s:?}: {e}")))
    };
    let (m, n, l) = (dim(fields[1])?, dim(fields[2])?, dim(fields[3])?);
    let mut g = CMat::zeros(m, n);
    for i in 0..m {
        let row = parse_pairs(lines.next(), n, "G row")?;
        for (j, v) in row.into_iter().enumerate() {
            g[(i, j)] = v;
        }
    }
    let h_r = CVec::from_vec(parse_pairs(lines.next(), n, "h_r")?);
    let h_d = CVec::from_vec(parse_pairs(lines.next(), m, "h_d")?);
    Ok((ChannelState::new(g, h_r, h_d)?, l))
}

pub fn write_binary<W: Write>(ch: &ChannelState, block_len: usize, mut w: W) -> Result<()> {
    let (m, n) = (ch.m(), ch.n());
    let mut buf = Vec::with_capacity(28 + 16 * (m * n + m + n));
    buf.extend_from_slice(MAGIC);
    for d in [m, n, block_len] {
        buf.extend_from_slice(&(d as u64).to_le_bytes());
    }
    let mut put = |v: C64| {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    };
    for i in 0..m {
        for j in 0..n {
            put(ch.g[(i, j)]);
        }
    }
    ch.h_r.iter().for_each(|&v| put(v));
    ch.h_d.iter().for_each(|&v| put(v));
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<(ChannelState, usize)> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < 28 || &buf[..4] != MAGIC {
        return Err(Error::Parse("not a binary channel dump".into()));
    }
    let word = |k: usize| u64::from_le_bytes(buf[4 + 8 * k..12 + 8 * k].try_into().unwrap()) as usize;
    let (m, n, l) = (word(0), word(1), word(2));
    let count = m
        .checked_mul(n)
        .and_then(|mn| mn.checked_add(m + n))
        .ok_or_else(|| Error::Parse("dimension overflow".into()))?;
    if buf.len() != 28 + 16 * count {
        return Err(Error::Parse(format!(
            "binary dump length {} does not match header ({m}x{n})",
            buf.len()
        )));
    }
    let mut vals = buf[28..].chunks_exact(16).map(|c| {
        C64::new(
            f64::from_le_bytes(c[..8].try_into().unwrap()),
            f64::from_le_bytes(c[8..].try_into().unwrap()),
        )
    });
    let mut g = CMat::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            g[(i, j)] = vals.next().unwrap();
        }
    }
    let h_r = CVec::from_iterator(n, vals.by_ref().take(n));
    let h_d = CVec::from_iterator(m, vals.by_ref().take(m));
    Ok((ChannelState::new(g, h_r, h_d)?, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_channels, SystemConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> ChannelState {
        let cfg = SystemConfig::new(3, 5, 7, 0.5, 0.5, 1.0, 1.0).unwrap();
        sample_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(77))
    }

    #[test]
    fn text_round_trip_is_exact() {
        let ch = sample();
        let mut buf = Vec::new();
        write_text(&ch, 7, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("pbit-channel 3 5 7\n"));
        let (back, l) = read_text(buf.as_slice()).unwrap();
        assert_eq!(l, 7);
        assert_eq!(back, ch);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let ch = sample();
        let mut buf = Vec::new();
        write_binary(&ch, 7, &mut buf).unwrap();
        let (back, l) = read_binary(buf.as_slice()).unwrap();
        assert_eq!(l, 7);
        assert_eq!(back, ch);
    }

    #[test]
    fn truncated_inputs_are_rejected() {
        let ch = sample();
        let mut buf = Vec::new();
        write_binary(&ch, 7, &mut buf).unwrap();
        assert!(read_binary(&buf[..buf.len() - 1]).is_err());
        assert!(read_text("pbit-channel 2 2 1\n1 2 3 4\n".as_bytes()).is_err());
        assert!(read_text("garbage".as_bytes()).is_err());
    }
}
