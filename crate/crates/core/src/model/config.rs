use crate::{Error, Result, C64};

/// A labelled signal constellation. `labels[i]` carries the bit pattern of
/// `points[i]`, most significant bit first in the bit stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<C64>,
    labels: Vec<u32>,
    bits_per_symbol: usize,
}

impl Constellation {
    pub fn new(points: Vec<C64>, labels: Vec<u32>) -> Result<Self> {
        let size = points.len();
        if size < 2 || !size.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "constellation size {size} is not a power of two >= 2"
            )));
        }
        if labels.len() != size {
            return Err(Error::DimensionMismatch {
                what: "constellation labels",
                expected: size,
                got: labels.len(),
            });
        }
        let mut seen = vec![false; size];
        for &lab in &labels {
            let idx = lab as usize;
            if idx >= size || seen[idx] {
                return Err(Error::InvalidConfig(format!(
                    "constellation labels must be a permutation of 0..{size}"
                )));
            }
            seen[idx] = true;
        }
        Ok(Self {
            points,
            labels,
            bits_per_symbol: size.trailing_zeros() as usize,
        })
    }

    /// Gray-labelled QPSK with every point at `|c|² = power`. The first bit
    /// picks the sign of the real part, the second the sign of the imaginary
    /// part, so quadrant neighbours differ in one bit.
    pub fn qpsk_gray(power: f64) -> Self {
        let a = (power / 2.0).sqrt();
        let points = vec![
            C64::new(a, a),
            C64::new(a, -a),
            C64::new(-a, a),
            C64::new(-a, -a),
        ];
        Self::new(points, vec![0b00, 0b01, 0b10, 0b11]).expect("static QPSK table")
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn average_power(&self) -> f64 {
        self.points.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    pub fn point_for_label(&self, label: u32) -> Option<C64> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|i| self.points[i])
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn nearest_index(&self, v: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.points.iter().enumerate() {
            let d = (c - v).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn nearest(&self, v: C64) -> C64 {
        self.points[self.nearest_index(v)]
    }

    /// Label of the point equal (to 1e-9) to `c`.
    pub fn label_of(&self, c: C64) -> Option<u32> {
        self.points
            .iter()
            .position(|p| (p - c).norm() < 1e-9)
            .map(|i| self.labels[i])
    }

    pub fn contains(&self, c: C64) -> bool {
        self.label_of(c).is_some()
    }
}

/// Scalar parameters of one PBIT link.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Receive antennas.
    pub m: usize,
    /// Reflecting elements.
    pub n: usize,
    /// Slots per block, the first one carrying the reference symbol.
    pub l: usize,
    /// Amplitude reflection coefficient.
    pub beta: f64,
    /// Probability that an element is on.
    pub rho: f64,
    /// Transmit power `P`.
    pub power: f64,
    /// Noise variance per receive sample.
    pub noise_var: f64,
    pub constellation: Constellation,
    pub reference_symbol: C64,
}

impl SystemConfig {
    /// Validated config with Gray QPSK at power `P`; the reference symbol is
    /// the point labelled all-zeros.
    pub fn new(
        m: usize,
        n: usize,
        l: usize,
        beta: f64,
        rho: f64,
        power: f64,
        noise_var: f64,
    ) -> Result<Self> {
        let constellation = Constellation::qpsk_gray(power.max(0.0));
        let reference_symbol = constellation.point_for_label(0).expect("label 0 exists");
        let cfg = Self {
            m,
            n,
            l,
            beta,
            rho,
            power,
            noise_var,
            constellation,
            reference_symbol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// M = N = 32, L = 100, β = 0.5, ρ = 0.5, P = 1 at the given SNR.
    pub fn reference_setup(snr_db: f64) -> Self {
        Self::new(32, 32, 100, 0.5, 0.5, 1.0, snr_db_to_noise_var(snr_db))
            .expect("reference setup is valid")
    }

    pub fn with_constellation(mut self, constellation: Constellation) -> Result<Self> {
        self.reference_symbol = constellation
            .point_for_label(0)
            .ok_or_else(|| Error::InvalidConfig("constellation lacks label 0".into()))?;
        self.constellation = constellation;
        self.validate()?;
        Ok(self)
    }

    pub fn with_noise_var(mut self, noise_var: f64) -> Result<Self> {
        self.noise_var = noise_var;
        self.validate()?;
        Ok(self)
    }

    pub fn with_snr_db(self, snr_db: f64) -> Result<Self> {
        self.with_noise_var(snr_db_to_noise_var(snr_db))
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        self.rho = rho;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.l == 0 {
            return Err(Error::InvalidConfig(format!(
                "dimensions must be positive (M={}, N={}, L={})",
                self.m, self.n, self.l
            )));
        }
        check_unit_interval("beta", self.beta)?;
        check_unit_interval("rho", self.rho)?;
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::InvalidConfig(format!("power {} must be > 0", self.power)));
        }
        // zero noise is allowed for noiseless checks
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise variance {} must be finite and >= 0",
                self.noise_var
            )));
        }
        for c in self.constellation.points() {
            if (c.norm_sqr() - self.power).abs() > 1e-9 * self.power.max(1.0) {
                return Err(Error::InvalidConfig(format!(
                    "constellation point {c} has power {} != P = {}",
                    c.norm_sqr(),
                    self.power
                )));
            }
        }
        if !self.constellation.contains(self.reference_symbol) {
            return Err(Error::InvalidConfig(
                "reference symbol is not a constellation point".into(),
            ));
        }
        Ok(())
    }

    pub fn snr_db(&self) -> f64 {
        noise_var_to_snr_db(self.noise_var)
    }

    /// Information bits carried by the `x` of one block (slot 1 excluded).
    pub fn payload_bits(&self) -> usize {
        (self.l - 1) * self.constellation.bits_per_symbol()
    }
}

fn check_unit_interval(what: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: v,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// `SNR = 1/σ²`.
pub fn snr_db_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn noise_var_to_snr_db(noise_var: f64) -> f64 {
    -10.0 * noise_var.log10()
}
