//! Counter-based random stream derivation.
//!
//! Every trial gets its own ChaCha stream keyed by the master seed, so
//! trials can run in any order or in parallel and still reproduce exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Each purpose gets a disjoint ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    Channel = 1,
    LisState = 2,
    Payload = 3,
    Noise = 4,
    RandomPhases = 5,
    Rounding = 6,
    Receiver = 7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    master_seed: u64,
}

impl StreamFactory {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Stream for `(trial, purpose)`. Trial indices must stay below 2⁵⁶.
    pub fn stream(&self, trial: u64, purpose: Purpose) -> ChaCha8Rng {
        self.stream_with_tag(trial, purpose, 0)
    }

    /// Like [`stream`](Self::stream) with an extra tag, e.g. an index into a
    /// parameter grid.
    pub fn stream_with_tag(&self, trial: u64, purpose: Purpose, tag: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed ^ (u64::from(tag) << 32).rotate_left(7));
        rng.set_stream((trial << 8) | purpose as u64);
        rng
    }
}
