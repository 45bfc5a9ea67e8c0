use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rollout::play;
use super::trace::Explanation;
use super::{
    build_cognitive_world, run_rollout, CognitionParams, CognitiveWorld, DecisionStreams,
    Energetics, RolloutRecord, Snapshot,
};
use crate::model::Action;
use crate::sim::Planning;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionStats {
    pub samples: u32,
    /// `None` when the action was never sampled.
    pub mean_return: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub chosen: Action,
    /// Indexed by [`Action::index`].
    pub stats: [ActionStats; 3],
    /// Only filled by [`explain`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<RolloutRecord>,
}

impl Decision {
    pub fn stats_for(&self, action: Action) -> ActionStats {
        self.stats[action.index()]
    }
}

/// Runs every rollout of one decision. Rollout `i` always uses stream `i`, so
/// the records do not depend on `planning`.
pub fn run_rollouts(
    world: &CognitiveWorld,
    params: &CognitionParams,
    streams: &DecisionStreams,
    planning: Planning,
    keep_frames: bool,
) -> Vec<RolloutRecord> {
    let one = |i: u32| run_rollout(world.clone(), params, &mut streams.rollout(i), keep_frames);
    match planning {
        Planning::Serial => (0..params.n_rollouts).map(one).collect(),
        Planning::Parallel => (0..params.n_rollouts).into_par_iter().map(one).collect(),
    }
}

/// First action and discounted return of every rollout, without keeping
/// traces. Rollouts reuse one scratch copy of `world`.
fn returns<'a>(
    world: &'a CognitiveWorld,
    params: &'a CognitionParams,
    streams: &DecisionStreams,
) -> impl Iterator<Item = (Action, f64)> + 'a {
    let mut scratch = world.clone();
    let mut order = Vec::with_capacity(world.agents.len());
    let streams = *streams;
    (0..params.n_rollouts).map(move |i| {
        scratch.reset_from(world);
        let outcome = play(
            &mut scratch,
            params,
            &mut streams.rollout(i),
            &mut order,
            None,
            |_, _, _| {},
        );
        (outcome.first_action, outcome.discounted_return)
    })
}

fn choose(
    results: impl IntoIterator<Item = (Action, f64)>,
    streams: &DecisionStreams,
) -> (Action, [ActionStats; 3]) {
    let mut sums = [0.0f64; 3];
    let mut counts = [0u32; 3];
    for (action, ret) in results {
        let i = action.index();
        sums[i] += ret;
        counts[i] += 1;
    }
    let stats: [ActionStats; 3] = std::array::from_fn(|i| ActionStats {
        samples: counts[i],
        mean_return: (counts[i] > 0).then(|| sums[i] / counts[i] as f64),
    });

    let best = stats
        .iter()
        .filter_map(|s| s.mean_return)
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<Action> = Action::ALL
        .into_iter()
        .filter(|a| stats[a.index()].mean_return == Some(best))
        .collect();
    let chosen = match tied.as_slice() {
        [only] => *only,
        _ => tied[streams.tie_break().random_range(0..tied.len())],
    };
    (chosen, stats)
}

/// Picks the first action with the highest mean discounted return over
/// `n_rollouts` random rollouts. Actions never sampled are not eligible; ties
/// are broken uniformly from the decision's own stream.
pub fn decide(
    snapshot: &Snapshot,
    params: &CognitionParams,
    energetics: &Energetics,
    streams: &DecisionStreams,
) -> Decision {
    let world = build_cognitive_world(snapshot, params, energetics);
    let (chosen, stats) = choose(returns(&world, params, streams), streams);
    Decision {
        chosen,
        stats,
        records: Vec::new(),
    }
}

/// Same decision as [`decide`], keeping every rollout with its frames.
pub fn explain(
    snapshot: &Snapshot,
    params: &CognitionParams,
    energetics: &Energetics,
    streams: &DecisionStreams,
) -> Explanation {
    let world = build_cognitive_world(snapshot, params, energetics);
    let records = run_rollouts(&world, params, streams, Planning::Serial, true);
    let (chosen, stats) = choose(
        records.iter().map(|r| (r.first_action, r.discounted_return)),
        streams,
    );
    Explanation {
        agent: snapshot.ego.id,
        tick: snapshot.tick,
        species: snapshot.ego.species,
        params: *params,
        snapshot: snapshot.clone(),
        initial_world: world,
        decision: Decision {
            chosen,
            stats,
            records,
        },
    }
}
