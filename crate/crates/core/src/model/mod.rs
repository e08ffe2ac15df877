//! System model: parameters, channel and signal sampling, block synthesis.

mod channel;
mod config;
pub mod dump;
mod entropy;
mod signal;
mod streams;

pub use channel::{sample_channels, ChannelState, PhaseShifts, UNIT_MODULUS_TOL};
pub use config::{noise_var_to_snr_db, snr_db_to_noise_var, Constellation, SystemConfig};
pub use entropy::{binary_entropy, entropy_inverse, RateInfo};
pub use signal::{
    effective_channel, modulate, random_bits, received_block, sample_lis_state, simulate_block,
    symbols_to_bits, unit_noise, BlockSignals,
};
pub use streams::{Purpose, StreamFactory};
