//! Counter-style random streams.
//!
//! Every random draw in a run comes from a stream identified by
//! `(master seed, purpose, agent id, tick, index)`. The identity is hashed
//! into a 256-bit ChaCha8 key, so a stream's contents never depend on which
//! thread asks for it or in what order agents are visited.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator algorithm backing every stream. Only one is supported; it
/// is named in the config file so that stored runs stay portable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RngAlgorithm {
    #[default]
    Chacha8,
}

/// What a stream is used for. The discriminants are part of the stream
/// identity and must never be renumbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Init = 1,
    Schedule = 2,
    Move = 3,
    Reproduce = 4,
    Decide = 5,
    Rollout = 6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub purpose: Purpose,
    pub agent: u64,
    pub tick: u64,
    pub index: u64,
}

impl StreamKey {
    pub fn new(seed: u64, purpose: Purpose, agent: u64, tick: u64) -> Self {
        Self {
            seed,
            purpose,
            agent,
            tick,
            index: 0,
        }
    }

    pub fn with_index(self, index: u64) -> Self {
        Self { index, ..self }
    }

    /// Opens the generator for this identity.
    pub fn rng(&self) -> RngStream {
        let mut state = splitmix64(self.seed);
        for word in [self.purpose as u64, self.agent, self.tick, self.index] {
            state = splitmix64(state ^ splitmix64(word.wrapping_add(0x632B_E59B_D9B4_E019)));
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

pub type RngStream = ChaCha8Rng;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
