use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CognitionParams, CognitiveWorld, GrassCell};
use crate::model::{random_turn, Action};
use crate::sim::{normalize_heading, AgentId, Species};

/// Reward received at one rollout tick. On the death tick `reward` is the
/// death reward and the trace ends there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardStep {
    pub tick: u32,
    pub action: Action,
    pub reward: f64,
    pub death: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAgent {
    pub id: AgentId,
    pub species: Species,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

/// Nested-world state after one rollout tick, kept only when explaining.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub tick: u32,
    pub ego_energy: f64,
    pub agents: Vec<FrameAgent>,
    /// Cells grazed during this tick, `[col, row]` in nested-grid coordinates.
    pub grazed: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutRecord {
    pub first_action: Action,
    pub trace: Vec<RewardStep>,
    pub discounted_return: f64,
    pub terminated_by_death: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frames: Vec<Frame>,
}

impl RolloutRecord {
    /// `sum_t discount^t * r_t` recomputed from the trace.
    pub fn recompute_return(&self, discount: f64) -> f64 {
        let mut factor = 1.0;
        let mut total = 0.0;
        for step in &self.trace {
            total += factor * step.reward;
            factor *= discount;
        }
        total
    }
}

/// Plays one random future in `world`, which the rollout owns and consumes.
///
/// The ego's first action is drawn uniformly before anything else, so it is
/// sampled even for zero-length rollouts. Each tick the ego takes a uniform
/// action, every other agent takes a base random step, in a freshly shuffled
/// order. The reward is the ego's change in energy; if the ego is eaten or
/// starves the tick's reward is `death_reward` and the rollout stops.
pub fn run_rollout<R: Rng + ?Sized>(
    mut world: CognitiveWorld,
    params: &CognitionParams,
    rng: &mut R,
    keep_frames: bool,
) -> RolloutRecord {
    run_rollout_in(&mut world, params, rng, keep_frames)
}

/// [`run_rollout`] on a world the caller keeps, so the final state of the
/// nested world can be inspected afterwards.
pub fn run_rollout_in<R: Rng + ?Sized>(
    world: &mut CognitiveWorld,
    params: &CognitionParams,
    rng: &mut R,
    keep_frames: bool,
) -> RolloutRecord {
    let mut trace = Vec::with_capacity(params.rollout_length as usize);
    let mut frames = Vec::new();
    let mut grazed = Vec::new();
    let mut order = Vec::with_capacity(world.agents.len());
    let outcome = play(
        world,
        params,
        rng,
        &mut order,
        keep_frames.then_some(&mut grazed),
        |world, step, grazed| {
            trace.push(step);
            if let Some(grazed) = grazed {
                frames.push(Frame {
                    tick: step.tick,
                    ego_energy: world.ego_energy,
                    agents: world
                        .agents
                        .iter()
                        .filter(|a| a.alive)
                        .map(|a| FrameAgent {
                            id: a.id,
                            species: a.species,
                            x: a.pos.x,
                            y: a.pos.y,
                            heading: a.heading,
                        })
                        .collect(),
                    grazed: std::mem::take(grazed),
                });
            }
        },
    );
    RolloutRecord {
        first_action: outcome.first_action,
        trace,
        discounted_return: outcome.discounted_return,
        terminated_by_death: outcome.died,
        frames,
    }
}

pub(crate) struct Outcome {
    pub first_action: Action,
    pub discounted_return: f64,
    pub died: bool,
}

/// The rollout loop proper. `world` is consumed in place; `order` is scratch.
/// `on_tick` sees the world after every tick together with the reward step.
pub(crate) fn play<R, F>(
    world: &mut CognitiveWorld,
    params: &CognitionParams,
    rng: &mut R,
    order: &mut Vec<usize>,
    mut grazed: Option<&mut Vec<[usize; 2]>>,
    mut on_tick: F,
) -> Outcome
where
    R: Rng + ?Sized,
    F: FnMut(&CognitiveWorld, RewardStep, Option<&mut Vec<[usize; 2]>>),
{
    let first_action = Action::ALL[rng.random_range(0..3)];
    let dims = world.dims();
    let side = dims.width;
    let ego = world.ego;
    let ego_gain = world.energetics.gain(world.agents[ego].species);
    let move_cost = world.energetics.move_cost;

    let mut discounted_return = 0.0;
    let mut factor = 1.0;
    let mut dead = false;

    for t in 0..params.rollout_length {
        let action = if t == 0 {
            first_action
        } else {
            Action::ALL[rng.random_range(0..3)]
        };
        let energy_before = world.ego_energy;

        order.clear();
        order.extend((0..world.agents.len()).filter(|&i| world.agents[i].alive));
        order.shuffle(rng);

        for &i in order.iter() {
            if !world.agents[i].alive {
                continue;
            }
            let turn = if i == ego {
                action.turn()
            } else {
                random_turn(rng)
            };
            let agent = &mut world.agents[i];
            agent.heading = normalize_heading(agent.heading + turn);
            agent.pos = dims.move_forward(agent.pos, agent.heading, 1.0);
            let (col, row) = dims.patch_at(agent.pos);
            let species = agent.species;
            if i == ego {
                world.ego_energy -= move_cost;
            }

            match species {
                Species::Sheep => {
                    if world.resolve(col, row, rng) == GrassCell::Live {
                        world.grass[row * side + col] = GrassCell::Dead;
                        if let Some(g) = grazed.as_deref_mut() {
                            g.push([col, row]);
                        }
                        if i == ego {
                            world.ego_energy += ego_gain;
                        }
                    }
                }
                Species::Wolf => {
                    let prey = world.agents.iter().position(|a| {
                        a.alive && a.species == Species::Sheep && dims.patch_at(a.pos) == (col, row)
                    });
                    if let Some(p) = prey {
                        world.agents[p].alive = false;
                        if p == ego {
                            dead = true;
                        }
                        if i == ego {
                            world.ego_energy += ego_gain;
                        }
                    }
                }
            }

            if i == ego && world.ego_energy <= 0.0 {
                dead = true;
            }
            if dead {
                break;
            }
        }

        let reward = if dead {
            params.death_reward
        } else {
            world.ego_energy - energy_before
        };
        discounted_return += factor * reward;
        factor *= params.discount;
        let step = RewardStep {
            tick: t,
            action,
            reward,
            death: dead,
        };
        on_tick(world, step, grazed.as_deref_mut());
        if dead {
            break;
        }
    }

    Outcome {
        first_action,
        discounted_return,
        died: dead,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cognition::{build_cognitive_world, observe, Energetics};
    use crate::sim::{Dims, Position, WorldState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn energetics() -> Energetics {
        Energetics {
            sheep_gain: 4.0,
            wolf_gain: 20.0,
            move_cost: 1.0,
        }
    }

    fn params(len: u32) -> CognitionParams {
        CognitionParams {
            n_rollouts: 1,
            rollout_length: len,
            ..CognitionParams::default()
        }
    }

    fn nested(w: &WorldState, ego: AgentId, p: &CognitionParams) -> CognitiveWorld {
        build_cognitive_world(&observe(w, ego, p.vision_radius).unwrap(), p, &energetics())
    }

    #[test]
    fn zero_length_rollout() {
        let mut w = WorldState::new(Dims::new(51, 51, true)).unwrap();
        let ego = w.spawn(Species::Sheep, Position::new(10.5, 10.5), 0.0, 5.0);
        let p = params(0);
        let mut seen = [false; 3];
        for seed in 0..30 {
            let r = run_rollout(nested(&w, ego, &p), &p, &mut ChaCha8Rng::seed_from_u64(seed), false);
            assert!(r.trace.is_empty());
            assert_eq!(r.discounted_return, 0.0);
            assert!(!r.terminated_by_death);
            seen[r.first_action.index()] = true;
        }
        assert_eq!(seen, [true; 3]);
    }

    #[test]
    fn two_meals_discounted() {
        // grass everywhere, no other agents: rewards are +3 for a fresh patch
        // and -1 when the second step stays inside the patch grazed at t = 0
        let mut w = WorldState::new(Dims::new(51, 51, true)).unwrap();
        for p in w.patches_mut() {
            p.grass = true;
        }
        let ego = w.spawn(Species::Sheep, Position::new(10.5, 10.5), 0.0, 5.0);
        let p = params(2);
        let mut double_meals = 0;
        for seed in 0..40 {
            let r = run_rollout(nested(&w, ego, &p), &p, &mut ChaCha8Rng::seed_from_u64(seed), false);
            let rewards: Vec<f64> = r.trace.iter().map(|s| s.reward).collect();
            assert_eq!(rewards[0], 3.0);
            if rewards == [3.0, 3.0] {
                double_meals += 1;
                assert!((r.discounted_return - 5.7).abs() < 1e-12);
            } else {
                assert_eq!(rewards, [3.0, -1.0]);
                assert!((r.discounted_return - 2.1).abs() < 1e-12);
            }
        }
        assert!(double_meals > 0);
    }

    #[test]
    fn eaten_ego_gets_death_reward() {
        let mut w = WorldState::new(Dims::new(51, 51, true)).unwrap();
        let ego = w.spawn(Species::Sheep, Position::new(10.5, 10.5), 0.0, 50.0);
        // surround the ego's landing patches with wolves already on them:
        // whatever the ego does, a wolf steps onto or sits on its patch.
        let mut deaths = 0;
        for dx in [-0.3, 0.0, 0.3] {
            w.spawn(Species::Wolf, Position::new(10.5 + dx, 11.4), 180.0, 10.0);
        }
        let p = params(1);
        for seed in 0..200 {
            let r = run_rollout(nested(&w, ego, &p), &p, &mut ChaCha8Rng::seed_from_u64(seed), false);
            if r.terminated_by_death {
                deaths += 1;
                let last = r.trace.last().unwrap();
                assert!(last.death);
                assert_eq!(last.reward, -1000.0);
                assert_eq!(r.discounted_return, -1000.0);
            }
        }
        assert!(deaths > 0);
    }

    #[test]
    fn starvation_is_death() {
        let mut w = WorldState::new(Dims::new(51, 51, true)).unwrap();
        let ego = w.spawn(Species::Wolf, Position::new(10.5, 10.5), 0.0, 1.5);
        let p = params(4);
        let r = run_rollout(nested(&w, ego, &p), &p, &mut ChaCha8Rng::seed_from_u64(1), false);
        // -1 then death at t = 1: -1 + 0.9 * -1000
        assert_eq!(r.trace.len(), 2);
        assert!(r.terminated_by_death);
        assert!((r.discounted_return - (-1.0 + 0.9 * -1000.0)).abs() < 1e-9);
    }

    #[test]
    fn unobserved_cells_resolve_once() {
        let mut w = WorldState::new(Dims::new(51, 51, true)).unwrap();
        let ego = w.spawn(Species::Sheep, Position::new(10.5, 10.5), 0.0, 5.0);
        let p = params(3);
        let mut cw = nested(&w, ego, &p);
        cw.fill_density = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (c, r) = (0, 0);
        assert_eq!(cw.cell(c, r), GrassCell::Unobserved);
        let first = cw.resolve(c, r, &mut rng);
        for _ in 0..50 {
            assert_eq!(cw.resolve(c, r, &mut rng), first);
        }
    }

    #[test]
    fn frames_follow_the_trace() {
        let mut w = WorldState::new(Dims::new(51, 51, true)).unwrap();
        let ego = w.spawn(Species::Sheep, Position::new(10.5, 10.5), 0.0, 5.0);
        w.spawn(Species::Sheep, Position::new(12.5, 10.5), 0.0, 5.0);
        let p = params(3);
        let a = run_rollout(nested(&w, ego, &p), &p, &mut ChaCha8Rng::seed_from_u64(8), true);
        let b = run_rollout(nested(&w, ego, &p), &p, &mut ChaCha8Rng::seed_from_u64(8), false);
        assert_eq!(a.frames.len(), a.trace.len());
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.frames[0].agents.len(), 2);
    }
}
