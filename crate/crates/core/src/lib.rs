//! Agent-based wolf-sheep-grass simulation where agents can plan with
//! Monte Carlo rollouts in a private, simplified copy of their surroundings.

pub mod cognition;
pub mod config;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
