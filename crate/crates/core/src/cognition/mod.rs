//! Agent-centric Monte Carlo cognition.
//!
//! An agent observes its surroundings ([`observe`]), builds a small private
//! model of them ([`build_cognitive_world`]), plays `n_rollouts` random
//! futures of `rollout_length` ticks in that model ([`run_rollout`]) and then
//! commits to the first action with the best mean discounted reward
//! ([`decide`]). [`explain`] makes the same decision but keeps every rollout
//! for inspection.

mod decide;
mod nested;
mod rollout;
mod snapshot;
pub mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Purpose, RngStream, Species, StreamKey};

pub use decide::{decide, explain, run_rollouts, ActionStats, Decision};
pub use nested::{build_cognitive_world, CogAgent, CognitiveWorld, GrassCell};
pub use rollout::{run_rollout, run_rollout_in, Frame, FrameAgent, RewardStep, RolloutRecord};
pub use snapshot::{observe, EgoView, NeighborView, ObservedCell, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CognitionParams {
    /// Total rollouts per decision, each with a uniformly random first action.
    pub n_rollouts: u32,
    /// Ticks simulated per rollout.
    pub rollout_length: u32,
    pub vision_radius: f64,
    pub discount: f64,
    pub death_reward: f64,
}

impl Default for CognitionParams {
    fn default() -> Self {
        Self {
            n_rollouts: 20,
            rollout_length: 3,
            vision_radius: 5.0,
            discount: 0.9,
            death_reward: -1000.0,
        }
    }
}

impl CognitionParams {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        if self.n_rollouts < 1 {
            return Err(Error::invalid(format!("{prefix}.n_rollouts"), "must be >= 1"));
        }
        if !(self.vision_radius > 0.0) || !self.vision_radius.is_finite() {
            return Err(Error::invalid(
                format!("{prefix}.vision_radius"),
                "must be a finite value > 0",
            ));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::invalid(
                format!("{prefix}.discount"),
                "must lie in (0, 1]",
            ));
        }
        if !self.death_reward.is_finite() {
            return Err(Error::invalid(
                format!("{prefix}.death_reward"),
                "must be finite",
            ));
        }
        Ok(())
    }

    /// Half-width in patches of the nested world: far enough that no agent
    /// seen within the vision radius can walk off it during a rollout.
    pub fn half_width(&self) -> usize {
        (self.vision_radius + self.rollout_length as f64).ceil() as usize
    }
}

/// What the ego believes eating and moving are worth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energetics {
    pub sheep_gain: f64,
    pub wolf_gain: f64,
    pub move_cost: f64,
}

impl Energetics {
    pub fn gain(&self, species: Species) -> f64 {
        match species {
            Species::Sheep => self.sheep_gain,
            Species::Wolf => self.wolf_gain,
        }
    }
}

/// The random streams owned by one decision: one per rollout plus one for
/// breaking ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionStreams {
    pub seed: u64,
    pub agent: u64,
    pub tick: u64,
}

impl DecisionStreams {
    pub fn rollout(&self, index: u32) -> RngStream {
        StreamKey::new(self.seed, Purpose::Rollout, self.agent, self.tick)
            .with_index(index as u64)
            .rng()
    }

    pub fn tie_break(&self) -> RngStream {
        StreamKey::new(self.seed, Purpose::Decide, self.agent, self.tick).rng()
    }
}
