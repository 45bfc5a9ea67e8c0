//! Two-phase tick scheduler.
//!
//! Phase 1 asks every live agent for a plan against the same pre-tick
//! world; it only ever sees `&WorldState` and may run on many threads.
//! Phase 2 applies the plans one at a time in an order shuffled by the
//! tick's schedule stream, so conflicts resolve by execution order.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::rng::{Purpose, StreamKey};
use super::world::{Agent, AgentId, WorldState};

/// Model rules plugged into [`two_phase_tick`].
pub trait TickRules: Sync {
    type Plan: Send;
    type Report;

    /// Phase 1. Must be a pure function of its arguments.
    fn plan(&self, world: &WorldState, agent: &Agent) -> Self::Plan;

    /// Called once before phase 2 with the untouched pre-tick world.
    fn begin(&self, world: &WorldState) -> Self::Report;

    /// Phase 2 for one agent. Only called while the agent is still present.
    fn execute(
        &self,
        world: &mut WorldState,
        id: AgentId,
        plan: Self::Plan,
        report: &mut Self::Report,
    );

    /// End-of-tick bookkeeping (culling, regrowth, final counts).
    fn finish(&self, world: &mut WorldState, report: &mut Self::Report);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Planning {
    Serial,
    /// Plans on the current rayon pool.
    #[default]
    Parallel,
}

/// Phase 1 only: one plan per live agent, ascending id.
pub fn plan_all<R: TickRules>(
    world: &WorldState,
    rules: &R,
    planning: Planning,
) -> Vec<(AgentId, R::Plan)> {
    let agents = world.agents();
    match planning {
        Planning::Serial => agents
            .iter()
            .map(|a| (a.id, rules.plan(world, a)))
            .collect(),
        Planning::Parallel => agents
            .par_iter()
            .map(|a| (a.id, rules.plan(world, a)))
            .collect(),
    }
}

/// Runs one full tick and advances the tick counter.
pub fn two_phase_tick<R: TickRules>(
    world: &mut WorldState,
    rules: &R,
    seed: u64,
    planning: Planning,
) -> R::Report {
    let plans = plan_all(world, rules, planning);
    let mut report = rules.begin(world);

    let mut slots: Vec<Option<(AgentId, R::Plan)>> = plans.into_iter().map(Some).collect();
    let mut order: Vec<usize> = (0..slots.len()).collect();
    let mut rng = StreamKey::new(seed, Purpose::Schedule, 0, world.tick()).rng();
    order.shuffle(&mut rng);

    for i in order {
        let (id, plan) = slots[i].take().expect("each slot executes once");
        if world.agent_index(id).is_some() {
            rules.execute(world, id, plan, &mut report);
        }
    }

    rules.finish(world, &mut report);
    world.advance_tick();
    report
}
