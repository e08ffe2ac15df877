use crate::{Error, Result};

/// Base-2 binary entropy with `0·log 0 = 0`.
pub fn binary_entropy(rho: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(rho) + term(1.0 - rho)
}

/// On-probability in `[0.5, 1]` whose entropy is `rate`.
///
/// `H` is decreasing on `[0.5, 1]`, so plain bisection to 1e-10 is enough.
pub fn entropy_inverse(rate: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::OutOfRange {
            what: "rate",
            value: rate,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-element information rate of the LIS and the matching on-probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInfo {
    pub rate: f64,
    pub rho: f64,
}

impl RateInfo {
    pub fn from_rate(rate: f64) -> Result<Self> {
        let rho = entropy_inverse(rate)?;
        Ok(Self { rate, rho })
    }

    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&rho) {
            return Err(Error::OutOfRange {
                what: "rho",
                value: rho,
                lo: 0.5,
                hi: 1.0,
            });
        }
        Ok(Self {
            rate: binary_entropy(rho),
            rho,
        })
    }
}
