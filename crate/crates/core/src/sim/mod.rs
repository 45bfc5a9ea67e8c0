//! Simulation substrate shared by the main model and the cognitive model.

pub mod rng;
pub mod schedule;
pub mod world;

pub use rng::{Purpose, RngAlgorithm, RngStream, StreamKey};
pub use schedule::{plan_all, two_phase_tick, Planning, TickRules};
pub use world::{
    heading_vector, normalize_heading, Agent, AgentId, Dims, Patch, Position, Species, WorldState,
};
