//! Property tests for the simulation and cognition invariants.

use acmcc::cognition::{
    build_cognitive_world, decide, observe, run_rollout, run_rollout_in, CognitionParams,
    DecisionStreams, Energetics, GrassCell, Snapshot,
};
use acmcc::model::{
    apply_action, maybe_reproduce, step_and_eat, Action, Census, ModelParams, Policy, SpeciesParams,
    WolfSheep,
};
use acmcc::sim::{plan_all, two_phase_tick, Dims, Planning, Position, Species, WorldState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn energetics() -> Energetics {
    ModelParams::default().energetics()
}

/// A 51x51 torus with random grass and a few agents, ego (a sheep) first.
fn scene(seed: u64, sheep: usize, wolves: usize, grass: f64) -> (WorldState, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = WorldState::new(Dims::new(51, 51, true)).unwrap();
    for r in 0..51 {
        for c in 0..51 {
            w.set_grass(c, r, rng.random_bool(grass));
        }
    }
    let near = |rng: &mut ChaCha8Rng| {
        Position::new(20.0 + rng.random_range(0.0..10.0), 20.0 + rng.random_range(0.0..10.0))
    };
    let ego = w.spawn(Species::Sheep, near(&mut rng), rng.random_range(0.0..360.0), 6.0);
    for _ in 0..sheep {
        let p = near(&mut rng);
        w.spawn(Species::Sheep, p, rng.random_range(0.0..360.0), 3.0);
    }
    for _ in 0..wolves {
        let p = near(&mut rng);
        w.spawn(Species::Wolf, p, rng.random_range(0.0..360.0), 10.0);
    }
    (w, ego)
}

fn snapshot(seed: u64) -> Snapshot {
    let (w, ego) = scene(seed, 4, 2, 0.4);
    observe(&w, ego, 5.0).unwrap()
}

fn params(n: u32, len: u32) -> CognitionParams {
    CognitionParams {
        n_rollouts: n,
        rollout_length: len,
        ..CognitionParams::default()
    }
}

fn small_model(sheep: usize, wolves: usize) -> ModelParams {
    let d = ModelParams::default();
    ModelParams {
        dims: Dims::new(25, 25, true),
        sheep: SpeciesParams {
            initial_count: sheep,
            ..d.sheep
        },
        wolves: SpeciesParams {
            initial_count: wolves,
            ..d.wolves
        },
        ..d
    }
}

fn rules(model: ModelParams, sheep: Policy, wolves: Policy, seed: u64) -> WolfSheep {
    WolfSheep {
        params: model,
        sheep_policy: sheep,
        wolf_policy: wolves,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn populations_and_grass_are_conserved(
        seed in any::<u64>(),
        sheep in 0usize..60,
        wolves in 0usize..30,
        cognitive in any::<bool>(),
    ) {
        let model = small_model(sheep, wolves);
        let sheep_policy = if cognitive { Policy::Cognitive(params(3, 2)) } else { Policy::Random };
        let r = rules(model, sheep_policy, Policy::Random, seed);
        let mut world = acmcc::model::init_world(&model, seed).unwrap();
        for _ in 0..40 {
            let before = Census::of(&world);
            let rep = two_phase_tick(&mut world, &r, seed, Planning::Serial);
            prop_assert_eq!(rep.start, before);
            prop_assert_eq!(
                before.sheep + rep.sheep_born,
                rep.sheep_count + rep.sheep_eaten + rep.sheep_starved
            );
            prop_assert_eq!(before.wolves + rep.wolves_born, rep.wolf_count + rep.wolves_starved);
            prop_assert_eq!(
                rep.grass_count as i64 - before.grass as i64,
                rep.grass_regrown as i64 - rep.grass_eaten as i64
            );
            prop_assert_eq!(Census::of(&world), Census {
                sheep: rep.sheep_count,
                wolves: rep.wolf_count,
                grass: rep.grass_count,
            });
            prop_assert!(world.agents().iter().all(|a| a.energy > 0.0));
        }
    }

    /// Plans depend on the pre-tick world only, however they are scheduled,
    /// and planning never touches the world.
    #[test]
    fn planning_is_isolated_and_pure(seed in any::<u64>()) {
        let model = small_model(40, 15);
        let r = rules(model, Policy::Cognitive(params(4, 2)), Policy::Cognitive(params(3, 1)), seed);
        let mut world = acmcc::model::init_world(&model, seed).unwrap();
        for _ in 0..5 {
            let frozen = world.clone();
            let serial = plan_all(&world, &r, Planning::Serial);
            let parallel = plan_all(&world, &r, Planning::Parallel);
            prop_assert_eq!(&serial, &parallel);
            prop_assert_eq!(&world, &frozen);
            // each plan equals the plan made alone against the same world
            for (id, plan) in serial.iter().step_by(7) {
                let alone = acmcc::sim::TickRules::plan(&r, &frozen, frozen.agent(*id).unwrap());
                prop_assert_eq!(*plan, alone);
            }
            two_phase_tick(&mut world, &r, seed, Planning::Parallel);
        }
    }

    #[test]
    fn discounted_return_matches_trace(seed in any::<u64>(), len in 0u32..6, gamma in 0.05f64..=1.0) {
        let p = CognitionParams { discount: gamma, ..params(8, len) };
        let s = snapshot(seed);
        let world = build_cognitive_world(&s, &p, &energetics());
        let streams = DecisionStreams { seed, agent: s.ego.id, tick: 0 };
        for i in 0..p.n_rollouts {
            let rec = run_rollout(world.clone(), &p, &mut streams.rollout(i), false);
            prop_assert!((rec.recompute_return(gamma) - rec.discounted_return).abs() < 1e-9);
            prop_assert!(rec.trace.len() <= len as usize);
            prop_assert_eq!(rec.terminated_by_death, rec.trace.last().is_some_and(|t| t.death));
        }
    }

    /// Rewards scaled by a power of two scale every mean exactly, so the
    /// choice under matched streams cannot change.
    #[test]
    fn argmax_is_scale_invariant(seed in any::<u64>(), k in -4i32..=4, len in 1u32..4) {
        let scale = 2f64.powi(k);
        let p = params(12, len);
        let mut s = snapshot(seed);
        let e = energetics();
        let streams = DecisionStreams { seed, agent: s.ego.id, tick: 3 };
        let base = decide(&s, &p, &e, &streams);

        s.ego.energy *= scale;
        let scaled_p = CognitionParams { death_reward: p.death_reward * scale, ..p };
        let scaled_e = Energetics {
            sheep_gain: e.sheep_gain * scale,
            wolf_gain: e.wolf_gain * scale,
            move_cost: e.move_cost * scale,
        };
        let scaled = decide(&s, &scaled_p, &scaled_e, &streams);
        prop_assert_eq!(base.chosen, scaled.chosen);
        for (a, b) in base.stats.iter().zip(scaled.stats) {
            prop_assert_eq!(a.samples, b.samples);
            prop_assert_eq!(a.mean_return.map(|m| m * scale), b.mean_return);
        }
    }

    /// No regrowth and no births inside the nested world.
    #[test]
    fn rollouts_never_grow_grass_or_agents(seed in any::<u64>(), len in 0u32..6) {
        let p = params(6, len);
        let s = snapshot(seed);
        let world = build_cognitive_world(&s, &p, &energetics());
        let streams = DecisionStreams { seed, agent: s.ego.id, tick: 0 };
        for i in 0..p.n_rollouts {
            let mut w = world.clone();
            let rec = run_rollout_in(&mut w, &p, &mut streams.rollout(i), true);
            let mut alive = world.alive_count();
            for f in &rec.frames {
                prop_assert!(f.agents.len() <= alive);
                alive = f.agents.len();
            }
            prop_assert_eq!(w.agents.len(), world.agents.len());
            for (before, after) in world.grass.iter().zip(&w.grass) {
                match before {
                    GrassCell::Dead => prop_assert_eq!(*after, GrassCell::Dead),
                    GrassCell::Live => prop_assert_ne!(*after, GrassCell::Unobserved),
                    GrassCell::Unobserved => {}
                }
            }
            let possible = |g: &[GrassCell]| g.iter().filter(|c| **c != GrassCell::Dead).count();
            prop_assert!(possible(&w.grass) <= possible(&world.grass));
        }
    }

    #[test]
    fn actions_turn_by_exactly_thirty_degrees(
        x in 0.0f64..51.0, y in 0.0f64..51.0, h in 0.0f64..360.0, a in 0usize..3,
    ) {
        let mut w = WorldState::new(Dims::new(51, 51, true)).unwrap();
        let id = w.spawn(Species::Wolf, Position::new(x, y), h, 10.0);
        let action = Action::ALL[a];
        apply_action(&mut w, &ModelParams::default(), id, action);
        let after = w.agent(id).unwrap().heading;
        let diff = (after - h).rem_euclid(360.0);
        let expected = action.turn().rem_euclid(360.0);
        let err = (diff - expected).abs().min(360.0 - (diff - expected).abs());
        prop_assert!(err < 1e-9, "{} -> {} via {:?}", h, after, action);
        prop_assert!((0.0..360.0).contains(&after));
    }

    /// Energy moves only through eating, the move cost and the split.
    #[test]
    fn energy_accounting_is_exact(seed in any::<u64>(), turn in -45.0f64..45.0) {
        let model = ModelParams {
            sheep: SpeciesParams { reproduce_prob: 0.5, ..ModelParams::default().sheep },
            ..ModelParams::default()
        };
        let (mut w, ego) = scene(seed, 3, 0, 0.5);
        let before = w.agent(ego).unwrap().energy;
        let ate = step_and_eat(&mut w, &model, ego, turn).is_some();
        let fed = before - model.move_cost + if ate { model.sheep.gain_from_food } else { 0.0 };
        prop_assert_eq!(w.agent(ego).unwrap().energy, fed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(child) = maybe_reproduce(&mut w, &model, ego, &mut rng) {
            prop_assert_eq!(w.agent(ego).unwrap().energy, fed / 2.0);
            prop_assert_eq!(w.agent(child).unwrap().energy, fed / 2.0);
        } else {
            prop_assert_eq!(w.agent(ego).unwrap().energy, fed);
        }
    }

    /// A patch eaten during tick t is edible again in tick t + R.
    #[test]
    fn grass_regrows_exactly_after_the_regrowth_time(regrow in 1u32..40, seed in any::<u64>()) {
        let model = ModelParams {
            dims: Dims::new(1, 5, true),
            grass_regrowth_time: regrow,
            sheep: SpeciesParams { initial_count: 0, gain_from_food: 4.0, reproduce_prob: 0.0 },
            wolves: SpeciesParams { initial_count: 0, gain_from_food: 20.0, reproduce_prob: 0.0 },
            ..ModelParams::default()
        };
        let mut world = WorldState::new(model.dims).unwrap();
        for r in 0..5 {
            world.set_grass(0, r, true);
        }
        // any turn in (-45, 45) from heading 0 lands in row 2
        let sheep = world.spawn(Species::Sheep, Position::new(0.5, 1.95), 0.0, 1e6);
        let r = rules(model, Policy::Random, Policy::Random, seed);
        let first = two_phase_tick(&mut world, &r, seed, Planning::Serial);
        prop_assert_eq!((first.tick, first.grass_eaten), (1, 1));
        world.remove(sheep);

        while !world.patch(0, 2).grass {
            two_phase_tick(&mut world, &r, seed, Planning::Serial);
        }
        let edible_in = world.tick() + 1;
        prop_assert_eq!(edible_in, 1 + regrow as u64);
    }
}

/// Resolved unobserved cells are live with the snapshot's density.
#[test]
fn unobserved_fill_is_bernoulli_in_the_observed_density() {
    for (seed, grass) in [(1u64, 0.2), (2, 0.5), (3, 0.8)] {
        let (w, ego) = scene(seed, 0, 0, grass);
        let s = observe(&w, ego, 3.0).unwrap();
        let p = CognitionParams {
            vision_radius: 3.0,
            ..params(4000, 5)
        };
        let world = build_cognitive_world(&s, &p, &energetics());
        let d = world.fill_density;
        let streams = DecisionStreams { seed, agent: ego, tick: 0 };
        let (mut live, mut resolved) = (0u64, 0u64);
        for i in 0..p.n_rollouts {
            let mut cw = world.clone();
            // the ego must not starve before wandering out of view
            cw.ego_energy = 1e6;
            let rec = run_rollout_in(&mut cw, &p, &mut streams.rollout(i), true);
            let grazed: Vec<[usize; 2]> = rec.frames.iter().flat_map(|f| f.grazed.clone()).collect();
            let side = cw.side();
            for (idx, (before, after)) in world.grass.iter().zip(&cw.grass).enumerate() {
                if *before != GrassCell::Unobserved || *after == GrassCell::Unobserved {
                    continue;
                }
                resolved += 1;
                let cell = [idx % side, idx / side];
                if *after == GrassCell::Live || grazed.contains(&cell) {
                    live += 1;
                }
            }
        }
        assert!(resolved > 2000, "only {resolved} cells resolved");
        let frac = live as f64 / resolved as f64;
        let se = (d * (1.0 - d) / resolved as f64).sqrt();
        assert!((frac - d).abs() <= 3.0 * se, "density {d}: observed {frac} over {resolved}, se {se}");
    }
}
