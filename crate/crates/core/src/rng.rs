//! Deterministic per-trial random streams.
//!
//! Every `(seed, power_index, trial_index)` triple maps to its own ChaCha
//! stream, so trials can run on any worker in any order and adding power
//! points never perturbs existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub seed: u64,
    pub power_index: u32,
    pub trial_index: u32,
}

impl StreamId {
    pub fn new(seed: u64, power_index: u32, trial_index: u32) -> Self {
        Self {
            seed,
            power_index,
            trial_index,
        }
    }

    /// Random generator for this stream. `lane` separates independent uses
    /// inside one trial (channel draws vs. signal-level oracle, say).
    pub fn rng(&self, lane: u8) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8] = lane;
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(((self.power_index as u64) << 32) | self.trial_index as u64);
        rng
    }
}

pub const CHANNEL_LANE: u8 = 0;
pub const ORACLE_LANE: u8 = 1;
