//! Wolf-sheep-grass predator-prey rules.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cognition::{self, CognitionParams, DecisionStreams, Energetics};
use crate::error::{Error, Result};
use crate::sim::{
    normalize_heading, Agent, AgentId, Dims, Position, Purpose, Species, StreamKey, TickRules,
    WorldState,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesParams {
    pub initial_count: usize,
    pub gain_from_food: f64,
    pub reproduce_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dims: Dims,
    pub sheep: SpeciesParams,
    pub wolves: SpeciesParams,
    pub grass_regrowth_time: u32,
    pub move_cost: f64,
    pub initial_grass_fraction: f64,
}

impl Default for ModelParams {
    /// Defaults of the NetLogo Models Library "Wolf Sheep Predation" model.
    fn default() -> Self {
        Self {
            dims: Dims::new(51, 51, true),
            sheep: SpeciesParams {
                initial_count: 100,
                gain_from_food: 4.0,
                reproduce_prob: 0.04,
            },
            wolves: SpeciesParams {
                initial_count: 50,
                gain_from_food: 20.0,
                reproduce_prob: 0.05,
            },
            grass_regrowth_time: 30,
            move_cost: 1.0,
            initial_grass_fraction: 0.5,
        }
    }
}

impl ModelParams {
    pub fn species(&self, species: Species) -> &SpeciesParams {
        match species {
            Species::Sheep => &self.sheep,
            Species::Wolf => &self.wolves,
        }
    }

    pub fn energetics(&self) -> Energetics {
        Energetics {
            sheep_gain: self.sheep.gain_from_food,
            wolf_gain: self.wolves.gain_from_food,
            move_cost: self.move_cost,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.width == 0 || self.dims.height == 0 {
            return Err(Error::ZeroSizedWorld {
                width: self.dims.width,
                height: self.dims.height,
            });
        }
        for (name, sp) in [("sheep", &self.sheep), ("wolves", &self.wolves)] {
            if !(sp.gain_from_food > 0.0) {
                return Err(Error::invalid(
                    format!("{name}.gain_from_food"),
                    "must be > 0",
                ));
            }
            if !(0.0..=1.0).contains(&sp.reproduce_prob) {
                return Err(Error::invalid(
                    format!("{name}.reproduce_prob"),
                    "must lie in [0, 1]",
                ));
            }
        }
        if self.grass_regrowth_time < 1 {
            return Err(Error::invalid("model.grass_regrowth_time", "must be >= 1"));
        }
        if !(self.move_cost >= 0.0) {
            return Err(Error::invalid("model.move_cost", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.initial_grass_fraction) {
            return Err(Error::invalid(
                "model.initial_grass_fraction",
                "must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// The three moves available to a deliberating agent. Each one turns,
/// takes a unit step and tries to eat on arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    TurnLeft30,
    Ahead,
    TurnRight30,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::TurnLeft30, Action::Ahead, Action::TurnRight30];

    /// Clockwise turn in degrees.
    pub fn turn(self) -> f64 {
        match self {
            Action::TurnLeft30 => -30.0,
            Action::Ahead => 0.0,
            Action::TurnRight30 => 30.0,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::TurnLeft30 => "turn_left30",
            Action::Ahead => "ahead",
            Action::TurnRight30 => "turn_right30",
        }
    }
}

/// How a species picks its move each tick.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum Policy {
    /// Uniform turn in (-45, 45) degrees.
    #[default]
    Random,
    Cognitive(CognitionParams),
}

impl Policy {
    pub fn is_cognitive(&self) -> bool {
        matches!(self, Policy::Cognitive(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Census {
    pub sheep: usize,
    pub wolves: usize,
    pub grass: usize,
}

impl Census {
    pub fn of(world: &WorldState) -> Self {
        let mut c = Census {
            grass: world.grass_count(),
            ..Census::default()
        };
        for a in world.agents() {
            match a.species {
                Species::Sheep => c.sheep += 1,
                Species::Wolf => c.wolves += 1,
            }
        }
        c
    }
}

/// Events and end-of-tick counts for one tick. `start` holds the counts the
/// tick began with, which is what efficiency densities are measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TickReport {
    pub tick: u64,
    pub patch_count: usize,
    pub start: Census,
    pub sheep_count: usize,
    pub wolf_count: usize,
    pub grass_count: usize,
    pub grass_eaten: usize,
    pub grass_regrown: usize,
    pub sheep_eaten: usize,
    pub sheep_born: usize,
    pub wolves_born: usize,
    pub sheep_starved: usize,
    pub wolves_starved: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Meal {
    Grass,
    Sheep(AgentId),
}

/// Builds the initial world. Patch grass, then sheep, then wolves all draw
/// from the run's init stream.
pub fn init_world(params: &ModelParams, seed: u64) -> Result<WorldState> {
    params.validate()?;
    let mut world = WorldState::new(params.dims)?;
    let mut rng = StreamKey::new(seed, Purpose::Init, 0, 0).rng();
    let regrow = params.grass_regrowth_time;

    for patch in world.patches_mut() {
        patch.grass = rng.random_bool(params.initial_grass_fraction);
        patch.regrow_countdown = if patch.grass {
            0
        } else {
            rng.random_range(0..regrow)
        };
    }

    let (w, h) = (params.dims.width as f64, params.dims.height as f64);
    for species in [Species::Sheep, Species::Wolf] {
        let sp = params.species(species);
        for _ in 0..sp.initial_count {
            let pos = Position::new(rng.random_range(0.0..w), rng.random_range(0.0..h));
            let heading = rng.random_range(0.0..360.0);
            let u: f64 = rng.random();
            // (0, 2 * gain]
            let energy = 2.0 * sp.gain_from_food * (1.0 - u);
            world.spawn(species, pos, heading, energy);
        }
    }
    Ok(world)
}

/// A turn for the base random walk, uniform in the open interval (-45, 45).
pub fn random_turn<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    90.0 * u - 45.0
}

/// Turn by `turn` degrees, take a unit step, pay the move cost, then try to
/// eat on the arrival patch.
pub fn step_and_eat(
    world: &mut WorldState,
    params: &ModelParams,
    id: AgentId,
    turn: f64,
) -> Option<Meal> {
    let dims = world.dims();
    let agent = world.agent_mut(id)?;
    agent.heading = normalize_heading(agent.heading + turn);
    agent.pos = dims.move_forward(agent.pos, agent.heading, 1.0);
    agent.energy -= params.move_cost;
    eat_attempt(world, params, id)
}

/// Base random movement: random turn, unit step, eat, pay.
pub fn base_random_action<R: Rng + ?Sized>(
    world: &mut WorldState,
    params: &ModelParams,
    id: AgentId,
    rng: &mut R,
) -> Option<Meal> {
    let turn = random_turn(rng);
    step_and_eat(world, params, id, turn)
}

pub fn apply_action(
    world: &mut WorldState,
    params: &ModelParams,
    id: AgentId,
    action: Action,
) -> Option<Meal> {
    step_and_eat(world, params, id, action.turn())
}

/// Sheep graze the current patch; wolves take the lowest-id sheep standing
/// on it.
pub fn eat_attempt(world: &mut WorldState, params: &ModelParams, id: AgentId) -> Option<Meal> {
    let agent = world.agent(id)?;
    let (col, row) = world.dims().patch_at(agent.pos);
    match agent.species {
        Species::Sheep => {
            let patch = world.patch_mut(col, row);
            if !patch.grass {
                return None;
            }
            patch.grass = false;
            patch.regrow_countdown = params.grass_regrowth_time;
            world.agent_mut(id)?.energy += params.sheep.gain_from_food;
            Some(Meal::Grass)
        }
        Species::Wolf => {
            let prey = world
                .agents_on_patch(Species::Sheep, col, row)
                .map(|a| a.id)
                .next()?;
            world.remove(prey);
            world.agent_mut(id)?.energy += params.wolves.gain_from_food;
            Some(Meal::Sheep(prey))
        }
    }
}

/// With the species' probability, halve the parent's energy and hatch a
/// child holding the other half, one unit step away on a random heading.
pub fn maybe_reproduce<R: Rng + ?Sized>(
    world: &mut WorldState,
    params: &ModelParams,
    id: AgentId,
    rng: &mut R,
) -> Option<AgentId> {
    let dims = world.dims();
    let parent = world.agent_mut(id)?;
    let prob = params.species(parent.species).reproduce_prob;
    if !rng.random_bool(prob) {
        return None;
    }
    parent.energy /= 2.0;
    let Agent {
        species,
        pos,
        energy,
        ..
    } = *parent;
    let heading = rng.random_range(0.0..360.0);
    let child_pos = dims.move_forward(pos, heading, 1.0);
    Some(world.spawn(species, child_pos, heading, energy))
}

/// Counts down bare patches; a countdown reaching zero turns the patch green.
pub fn regrow_grass(world: &mut WorldState) -> usize {
    let mut regrown = 0;
    for patch in world.patches_mut().iter_mut().filter(|p| !p.grass) {
        patch.regrow_countdown = patch.regrow_countdown.saturating_sub(1);
        if patch.regrow_countdown == 0 {
            patch.grass = true;
            regrown += 1;
        }
    }
    regrown
}

/// Removes every agent with energy <= 0. Returns (sheep, wolves) removed.
pub fn cull_dead(world: &mut WorldState) -> (usize, usize) {
    let (mut sheep, mut wolves) = (0, 0);
    world.retain_agents(|a| {
        if a.energy > 0.0 {
            return true;
        }
        match a.species {
            Species::Sheep => sheep += 1,
            Species::Wolf => wolves += 1,
        }
        false
    });
    (sheep, wolves)
}

/// What an agent decided in phase 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plan {
    Wander { turn: f64 },
    Act(Action),
}

impl Plan {
    pub fn turn(self) -> f64 {
        match self {
            Plan::Wander { turn } => turn,
            Plan::Act(a) => a.turn(),
        }
    }
}

/// The main predator-prey model wired into the two-phase scheduler.
#[derive(Debug, Clone, PartialEq)]
pub struct WolfSheep {
    pub params: ModelParams,
    pub sheep_policy: Policy,
    pub wolf_policy: Policy,
    pub seed: u64,
}

impl WolfSheep {
    pub fn policy(&self, species: Species) -> &Policy {
        match species {
            Species::Sheep => &self.sheep_policy,
            Species::Wolf => &self.wolf_policy,
        }
    }

    pub fn decision_streams(&self, id: AgentId, tick: u64) -> DecisionStreams {
        DecisionStreams {
            seed: self.seed,
            agent: id,
            tick,
        }
    }

    pub fn cognition(&self, species: Species) -> Option<&CognitionParams> {
        match self.policy(species) {
            Policy::Cognitive(c) => Some(c),
            Policy::Random => None,
        }
    }
}

impl TickRules for WolfSheep {
    type Plan = Plan;
    type Report = TickReport;

    fn plan(&self, world: &WorldState, agent: &Agent) -> Plan {
        match self.policy(agent.species) {
            Policy::Random => {
                let mut rng = StreamKey::new(self.seed, Purpose::Move, agent.id, world.tick()).rng();
                Plan::Wander {
                    turn: random_turn(&mut rng),
                }
            }
            Policy::Cognitive(cp) => {
                let snapshot = cognition::observe(world, agent.id, cp.vision_radius)
                    .expect("planning agent is live");
                let decision = cognition::decide(
                    &snapshot,
                    cp,
                    &self.params.energetics(),
                    &self.decision_streams(agent.id, world.tick()),
                );
                Plan::Act(decision.chosen)
            }
        }
    }

    fn begin(&self, world: &WorldState) -> TickReport {
        TickReport {
            tick: world.tick() + 1,
            patch_count: world.patches().len(),
            start: Census::of(world),
            ..TickReport::default()
        }
    }

    fn execute(&self, world: &mut WorldState, id: AgentId, plan: Plan, report: &mut TickReport) {
        let tick = world.tick();
        match step_and_eat(world, &self.params, id, plan.turn()) {
            Some(Meal::Grass) => report.grass_eaten += 1,
            Some(Meal::Sheep(_)) => report.sheep_eaten += 1,
            None => {}
        }
        let agent = world.agent(id).expect("executing agent is present");
        let species = agent.species;
        if agent.energy <= 0.0 {
            world.remove(id);
            match species {
                Species::Sheep => report.sheep_starved += 1,
                Species::Wolf => report.wolves_starved += 1,
            }
            return;
        }
        let mut rng = StreamKey::new(self.seed, Purpose::Reproduce, id, tick).rng();
        if maybe_reproduce(world, &self.params, id, &mut rng).is_some() {
            match species {
                Species::Sheep => report.sheep_born += 1,
                Species::Wolf => report.wolves_born += 1,
            }
        }
    }

    fn finish(&self, world: &mut WorldState, report: &mut TickReport) {
        let (sheep, wolves) = cull_dead(world);
        report.sheep_starved += sheep;
        report.wolves_starved += wolves;
        report.grass_regrown = regrow_grass(world);
        let end = Census::of(world);
        report.sheep_count = end.sheep;
        report.wolf_count = end.wolves;
        report.grass_count = end.grass;
    }
}
