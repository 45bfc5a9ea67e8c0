//! Single runs, sweeps over rollout settings, and their CSV files.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::cognition::trace::Explanation;
use crate::cognition::{explain, observe, CognitionParams};
use crate::error::{Error, Result};
use crate::metrics::{masked_mean, sheep_efficiency, wolf_efficiency, Interval, Masked};
use crate::model::{init_world, Census, ModelParams, Policy, TickReport, WolfSheep};
use crate::sim::{two_phase_tick, AgentId, Planning, Species};

/// Everything a run needs apart from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub sheep: Policy,
    pub wolves: Policy,
    pub ticks: u64,
    /// First tick included in population means.
    pub warmup: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            sheep: Policy::Random,
            wolves: Policy::Random,
            ticks: 2000,
            warmup: 500,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        for (name, policy) in [("sheep", &self.sheep), ("wolves", &self.wolves)] {
            if let Policy::Cognitive(c) = policy {
                c.validate(name)?;
                let room = self.model.dims.width.min(self.model.dims.height) as f64 / 2.0 - 1.0;
                if self.model.dims.wrap && c.vision_radius >= room {
                    return Err(Error::invalid(
                        format!("{name}.vision_radius"),
                        format!("must be < {room} so the vision disk does not overlap itself"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn policy_mut(&mut self, species: Species) -> &mut Policy {
        match species {
            Species::Sheep => &mut self.sheep,
            Species::Wolf => &mut self.wolves,
        }
    }

    pub fn policy(&self, species: Species) -> &Policy {
        match species {
            Species::Sheep => &self.sheep,
            Species::Wolf => &self.wolves,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRow {
    pub report: TickReport,
    pub sheep_eff: Option<f64>,
    pub wolf_eff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Extinction {
    pub tick: u64,
    pub species: Species,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub ticks_run: u64,
    pub extinction: Option<Extinction>,
    pub sheep_eff: Masked,
    pub wolf_eff: Masked,
    pub sheep_eff_from_warmup: Masked,
    pub wolf_eff_from_warmup: Masked,
    /// Mean end-of-tick populations over ticks `>= warmup`. A run that ended
    /// before the warm-up uses its final census instead.
    pub mean_sheep_pop: f64,
    pub mean_wolf_pop: f64,
    pub final_census: Census,
}

impl RunSummary {
    pub fn efficiency(&self, species: Species) -> Option<f64> {
        match species {
            Species::Sheep => self.sheep_eff.mean,
            Species::Wolf => self.wolf_eff.mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub initial: Census,
    pub stream: Vec<TickRow>,
    pub summary: RunSummary,
}

/// Simulates `config.ticks` ticks, stopping early once a species that was
/// present at the start has died out.
pub fn run_experiment(config: &ExperimentConfig, seed: u64, planning: Planning) -> Result<RunResult> {
    config.validate()?;
    let mut world = init_world(&config.model, seed)?;
    let rules = WolfSheep {
        params: config.model,
        sheep_policy: config.sheep,
        wolf_policy: config.wolves,
        seed,
    };
    let initial = Census::of(&world);
    let mut stream = Vec::with_capacity(config.ticks as usize);
    let mut extinction = None;

    for _ in 0..config.ticks {
        let report = two_phase_tick(&mut world, &rules, seed, planning);
        stream.push(TickRow {
            report,
            sheep_eff: sheep_efficiency(&report),
            wolf_eff: wolf_efficiency(&report),
        });
        if initial.sheep > 0 && report.sheep_count == 0 {
            extinction = Some(Extinction {
                tick: report.tick,
                species: Species::Sheep,
            });
        } else if initial.wolves > 0 && report.wolf_count == 0 {
            extinction = Some(Extinction {
                tick: report.tick,
                species: Species::Wolf,
            });
        }
        if extinction.is_some() {
            break;
        }
    }

    let summary = summarize(&stream, initial, config.warmup, extinction);
    Ok(RunResult {
        config: config.clone(),
        seed,
        initial,
        stream,
        summary,
    })
}

/// Replays the run up to `tick` completed ticks and explains the decision
/// `agent` makes next. The rollouts use the same streams as the plain run, so
/// the chosen action is the one the agent takes there.
pub fn explain_at(
    config: &ExperimentConfig,
    seed: u64,
    agent: AgentId,
    tick: u64,
    planning: Planning,
) -> Result<Explanation> {
    config.validate()?;
    let mut world = init_world(&config.model, seed)?;
    let rules = WolfSheep {
        params: config.model,
        sheep_policy: config.sheep,
        wolf_policy: config.wolves,
        seed,
    };
    let unavailable = |reason: String| Error::AgentUnavailable { agent, tick, reason };
    while world.tick() < tick {
        if world.agent(agent).is_none() {
            return Err(unavailable(format!("agent died at tick {}", world.tick())));
        }
        two_phase_tick(&mut world, &rules, seed, planning);
    }
    let me = world
        .agent(agent)
        .ok_or_else(|| unavailable("agent is dead or was never born".into()))?;
    let params = rules
        .cognition(me.species)
        .ok_or_else(|| unavailable(format!("{} are not cognitive in this config", me.species.label())))?;
    let snapshot = observe(&world, agent, params.vision_radius).expect("agent is live");
    Ok(explain(
        &snapshot,
        params,
        &config.model.energetics(),
        &rules.decision_streams(agent, tick),
    ))
}

fn summarize(
    stream: &[TickRow],
    initial: Census,
    warmup: u64,
    extinction: Option<Extinction>,
) -> RunSummary {
    let warm: Vec<&TickRow> = stream.iter().filter(|r| r.report.tick >= warmup).collect();
    let final_census = stream
        .last()
        .map(|r| Census {
            sheep: r.report.sheep_count,
            wolves: r.report.wolf_count,
            grass: r.report.grass_count,
        })
        .unwrap_or(initial);
    let (mean_sheep_pop, mean_wolf_pop) = if warm.is_empty() {
        (final_census.sheep as f64, final_census.wolves as f64)
    } else {
        let n = warm.len() as f64;
        (
            warm.iter().map(|r| r.report.sheep_count as f64).sum::<f64>() / n,
            warm.iter().map(|r| r.report.wolf_count as f64).sum::<f64>() / n,
        )
    };
    RunSummary {
        ticks_run: stream.len() as u64,
        extinction,
        sheep_eff: masked_mean(stream.iter().map(|r| r.sheep_eff)),
        wolf_eff: masked_mean(stream.iter().map(|r| r.wolf_eff)),
        sheep_eff_from_warmup: masked_mean(warm.iter().map(|r| r.sheep_eff)),
        wolf_eff_from_warmup: masked_mean(warm.iter().map(|r| r.wolf_eff)),
        mean_sheep_pop,
        mean_wolf_pop,
        final_census,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub const TICK_HEADER: [&str; 8] = [
    "tick",
    "sheep",
    "wolves",
    "grass",
    "grass_eaten",
    "sheep_eaten",
    "sheep_eff",
    "wolf_eff",
];

/// Per-tick CSV: a tick-0 row with the initial census, then one row per
/// simulated tick. Undefined efficiencies are empty fields.
pub fn write_ticks_csv<W: Write>(run: &RunResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TICK_HEADER)?;
    let i = run.initial;
    w.write_record([
        "0".to_string(),
        i.sheep.to_string(),
        i.wolves.to_string(),
        i.grass.to_string(),
        "0".into(),
        "0".into(),
        String::new(),
        String::new(),
    ])?;
    for row in &run.stream {
        let r = &row.report;
        w.write_record([
            r.tick.to_string(),
            r.sheep_count.to_string(),
            r.wolf_count.to_string(),
            r.grass_count.to_string(),
            r.grass_eaten.to_string(),
            r.sheep_eaten.to_string(),
            opt(row.sheep_eff),
            opt(row.wolf_eff),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub const SUMMARY_HEADER: [&str; 16] = [
    "seed",
    "ticks_run",
    "extinction_tick",
    "extinct_species",
    "mean_sheep_eff",
    "sheep_eff_ticks",
    "sheep_eff_excluded",
    "mean_wolf_eff",
    "wolf_eff_ticks",
    "wolf_eff_excluded",
    "warmup",
    "mean_sheep_pop",
    "mean_wolf_pop",
    "final_sheep",
    "final_wolves",
    "final_grass",
];

pub fn write_summary_csv<W: Write>(run: &RunResult, out: W) -> Result<()> {
    let s = &run.summary;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    w.write_record([
        run.seed.to_string(),
        s.ticks_run.to_string(),
        s.extinction.map(|e| e.tick.to_string()).unwrap_or_default(),
        s.extinction
            .map(|e| e.species.label().to_string())
            .unwrap_or_default(),
        opt(s.sheep_eff.mean),
        s.sheep_eff.used.to_string(),
        s.sheep_eff.excluded.to_string(),
        opt(s.wolf_eff.mean),
        s.wolf_eff.used.to_string(),
        s.wolf_eff.excluded.to_string(),
        run.config.warmup.to_string(),
        s.mean_sheep_pop.to_string(),
        s.mean_wolf_pop.to_string(),
        s.final_census.sheep.to_string(),
        s.final_census.wolves.to_string(),
        s.final_census.grass.to_string(),
    ])?;
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Grid of rollout settings for one cognitive species; the other species
/// stays on the random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub species: Species,
    pub n_rollouts: Vec<u32>,
    pub rollout_lengths: Vec<u32>,
    pub repetitions: u32,
    pub ticks: u64,
    pub warmup: u64,
    pub base_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            return Err(Error::invalid("sweep.repetitions", "must be >= 1"));
        }
        if self.ticks < self.warmup {
            return Err(Error::invalid("sweep.ticks", "must be >= sweep.warmup"));
        }
        if self.n_rollouts.is_empty() {
            return Err(Error::invalid("sweep.n_rollouts", "must not be empty"));
        }
        if self.rollout_lengths.is_empty() {
            return Err(Error::invalid("sweep.rollout_lengths", "must not be empty"));
        }
        if self.n_rollouts.contains(&0) {
            return Err(Error::invalid("sweep.n_rollouts", "values must be >= 1"));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.n_rollouts.len() * self.rollout_lengths.len()
    }

    /// One entry per run, in cell order then repetition order.
    pub fn runs(&self) -> Vec<RunId> {
        let mut out = Vec::with_capacity(self.cells() * self.repetitions as usize);
        for &n in &self.n_rollouts {
            for &len in &self.rollout_lengths {
                for rep in 0..self.repetitions {
                    let index = out.len() as u64;
                    out.push(RunId {
                        index,
                        cell: (index / self.repetitions as u64) as usize,
                        n_rollouts: n,
                        rollout_length: len,
                        rep,
                        seed: self.base_seed ^ index,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunId {
    pub index: u64,
    pub cell: usize,
    pub n_rollouts: u32,
    pub rollout_length: u32,
    pub rep: u32,
    pub seed: u64,
}

impl RunId {
    /// Directory name for the run's files.
    pub fn dir_name(&self) -> String {
        format!("r{}_l{}_rep{}", self.n_rollouts, self.rollout_length, self.rep)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub id: RunId,
    pub summary: std::result::Result<RunSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub species: Species,
    pub n_rollouts: u32,
    pub rollout_length: u32,
    /// Successful runs in the cell.
    pub reps: usize,
    pub failures: usize,
    pub efficiency: Option<Interval>,
    pub sheep_pop: Option<Interval>,
    pub wolf_pop: Option<Interval>,
    pub extinctions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub spec: SweepSpec,
    pub runs: Vec<RunOutcome>,
    pub aggregate: Vec<AggregateRow>,
}

impl SweepOutcome {
    pub fn row(&self, n_rollouts: u32, rollout_length: u32) -> Option<&AggregateRow> {
        self.aggregate
            .iter()
            .find(|r| r.n_rollouts == n_rollouts && r.rollout_length == rollout_length)
    }

    pub fn succeeded(&self) -> usize {
        self.runs.iter().filter(|r| r.summary.is_ok()).count()
    }
}

/// The config one sweep run uses: `base` with the cognitive species switched
/// to the run's rollout settings. Vision radius, discount and death reward
/// come from `base` when it already makes that species cognitive.
pub fn sweep_run_config(spec: &SweepSpec, base: &ExperimentConfig, id: &RunId) -> ExperimentConfig {
    let template = match base.policy(spec.species) {
        Policy::Cognitive(c) => *c,
        Policy::Random => CognitionParams::default(),
    };
    let mut config = base.clone();
    config.ticks = spec.ticks;
    config.warmup = spec.warmup;
    *config.policy_mut(spec.species) = Policy::Cognitive(CognitionParams {
        n_rollouts: id.n_rollouts,
        rollout_length: id.rollout_length,
        ..template
    });
    config
}

/// Runs every cell of the sweep. `on_run` sees each finished run (to write
/// its files or report progress); only summaries are kept. A failing run is
/// recorded and the sweep carries on.
pub fn run_sweep<F>(
    spec: &SweepSpec,
    base: &ExperimentConfig,
    planning: Planning,
    on_run: F,
) -> Result<SweepOutcome>
where
    F: Fn(&RunId, &RunResult) -> Result<()> + Sync,
{
    spec.validate()?;
    let other = match spec.species {
        Species::Sheep => Species::Wolf,
        Species::Wolf => Species::Sheep,
    };
    if base.policy(other).is_cognitive() {
        return Err(Error::invalid(
            format!("{}.policy", other.label()),
            "the non-swept species must be random in a sweep",
        ));
    }
    let ids = spec.runs();
    if let Some(first) = ids.first() {
        sweep_run_config(spec, base, first).validate()?;
    }

    let one = |id: &RunId| {
        let config = sweep_run_config(spec, base, id);
        let summary = run_experiment(&config, id.seed, planning)
            .and_then(|run| on_run(id, &run).map(|_| run.summary))
            .map_err(|e| e.to_string());
        RunOutcome { id: *id, summary }
    };
    let runs: Vec<RunOutcome> = match planning {
        Planning::Serial => ids.iter().map(one).collect(),
        Planning::Parallel => ids.par_iter().map(one).collect(),
    };

    let aggregate = aggregate(spec, &runs);
    Ok(SweepOutcome {
        spec: spec.clone(),
        runs,
        aggregate,
    })
}

fn aggregate(spec: &SweepSpec, runs: &[RunOutcome]) -> Vec<AggregateRow> {
    let mut rows = Vec::with_capacity(spec.cells());
    for cell in runs.chunk_by(|a, b| a.id.cell == b.id.cell) {
        let ok: Vec<&RunSummary> = cell.iter().filter_map(|r| r.summary.as_ref().ok()).collect();
        let eff: Vec<f64> = ok.iter().filter_map(|s| s.efficiency(spec.species)).collect();
        let sheep: Vec<f64> = ok.iter().map(|s| s.mean_sheep_pop).collect();
        let wolves: Vec<f64> = ok.iter().map(|s| s.mean_wolf_pop).collect();
        rows.push(AggregateRow {
            species: spec.species,
            n_rollouts: cell[0].id.n_rollouts,
            rollout_length: cell[0].id.rollout_length,
            reps: ok.len(),
            failures: cell.len() - ok.len(),
            efficiency: Interval::of(&eff),
            sheep_pop: Interval::of(&sheep),
            wolf_pop: Interval::of(&wolves),
            extinctions: ok.iter().filter(|s| s.extinction.is_some()).count(),
        });
    }
    rows
}

pub const AGGREGATE_HEADER: [&str; 11] = [
    "species",
    "n_rollouts",
    "rollout_length",
    "reps",
    "mean_eff",
    "eff_ci95",
    "mean_sheep_pop",
    "sheep_pop_ci95",
    "mean_wolf_pop",
    "wolf_pop_ci95",
    "extinctions",
];

pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], out: W) -> Result<()> {
    let mean = |i: &Option<Interval>| opt(i.map(|i| i.mean));
    let half = |i: &Option<Interval>| opt(i.map(|i| i.half_width));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.species.label().to_string(),
            r.n_rollouts.to_string(),
            r.rollout_length.to_string(),
            r.reps.to_string(),
            mean(&r.efficiency),
            half(&r.efficiency),
            mean(&r.sheep_pop),
            half(&r.sheep_pop),
            mean(&r.wolf_pop),
            half(&r.wolf_pop),
            r.extinctions.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Writes `ticks.csv` and `summary.csv` for one run into `dir`.
pub fn write_run_files(run: &RunResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ticks = dir.join("ticks.csv");
    write_ticks_csv(run, create(&ticks)?)?;
    let summary = dir.join("summary.csv");
    write_summary_csv(run, create(&summary)?)?;
    Ok(())
}

/// Writes a sweep run's per-tick file under `<dir>/<r_l_rep>/ticks.csv`.
pub fn write_sweep_run(id: &RunId, run: &RunResult, dir: &Path) -> Result<()> {
    let cell = dir.join(id.dir_name());
    fs::create_dir_all(&cell).map_err(|e| Error::io(&cell, e))?;
    let path = cell.join("ticks.csv");
    write_ticks_csv(run, create(&path)?)
}

pub fn write_aggregate_file(outcome: &SweepOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("aggregate.csv");
    write_aggregate_csv(&outcome.aggregate, create(&path)?)
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(ticks: u64) -> ExperimentConfig {
        ExperimentConfig {
            ticks,
            warmup: 0,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn zero_tick_run() {
        let run = run_experiment(&small(0), 1, Planning::Serial).unwrap();
        assert!(run.stream.is_empty());
        assert_eq!(run.summary.final_census, run.initial);
        assert_eq!(run.summary.mean_sheep_pop, 100.0);
        let mut buf = Vec::new();
        write_ticks_csv(&run, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn explained_choice_is_the_action_taken() {
        use crate::model::Plan;
        use crate::sim::plan_all;

        let mut config = small(10);
        config.sheep = Policy::Cognitive(CognitionParams {
            n_rollouts: 5,
            ..CognitionParams::default()
        });
        let rules = WolfSheep {
            params: config.model,
            sheep_policy: config.sheep,
            wolf_policy: config.wolves,
            seed: 8,
        };
        let mut world = init_world(&config.model, 8).unwrap();
        for _ in 0..4 {
            two_phase_tick(&mut world, &rules, 8, Planning::Serial);
        }
        let plans = plan_all(&world, &rules, Planning::Serial);
        let mut checked = 0;
        for (id, plan) in plans.iter().filter(|(_, p)| matches!(p, Plan::Act(_))).take(5) {
            let x = explain_at(&config, 8, *id, 4, Planning::Serial).unwrap();
            assert_eq!(Plan::Act(x.decision.chosen), *plan);
            assert_eq!(x.decision.records.len(), 5);
            checked += 1;
        }
        assert_eq!(checked, 5);

        let wolf = world.agents().iter().find(|a| a.species == Species::Wolf).unwrap().id;
        let e = explain_at(&config, 8, wolf, 4, Planning::Serial).unwrap_err();
        assert!(matches!(e, Error::AgentUnavailable { .. }), "{e}");
        let e = explain_at(&config, 8, 1_000_000, 4, Planning::Serial).unwrap_err();
        assert!(matches!(e, Error::AgentUnavailable { .. }), "{e}");
    }

    #[test]
    fn repeat_runs_identical() {
        let a = run_experiment(&small(60), 3, Planning::Serial).unwrap();
        let b = run_experiment(&small(60), 3, Planning::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conservation_each_tick() {
        let run = run_experiment(&small(300), 5, Planning::Serial).unwrap();
        let mut prev = run.initial;
        for row in &run.stream {
            let r = row.report;
            assert_eq!(r.start, prev);
            assert_eq!(
                r.start.sheep + r.sheep_born,
                r.sheep_count + r.sheep_eaten + r.sheep_starved
            );
            assert_eq!(r.start.wolves + r.wolves_born, r.wolf_count + r.wolves_starved);
            assert_eq!(
                r.start.grass as i64 + r.grass_regrown as i64 - r.grass_eaten as i64,
                r.grass_count as i64
            );
            prev = Census {
                sheep: r.sheep_count,
                wolves: r.wolf_count,
                grass: r.grass_count,
            };
        }
    }

    #[test]
    fn extinction_stops_early() {
        let mut c = small(500);
        c.model.wolves.initial_count = 1;
        c.model.wolves.reproduce_prob = 0.0;
        c.model.sheep.initial_count = 0;
        let run = run_experiment(&c, 2, Planning::Serial).unwrap();
        let e = run.summary.extinction.unwrap();
        assert_eq!(e.species, Species::Wolf);
        assert_eq!(run.stream.len() as u64, e.tick);
        assert!(run.stream.len() < 500);
    }

    #[test]
    fn sweep_cardinality_and_seeds() {
        let spec = SweepSpec {
            species: Species::Sheep,
            n_rollouts: vec![1, 2],
            rollout_lengths: vec![0, 1],
            repetitions: 3,
            ticks: 5,
            warmup: 0,
            base_seed: 0xABCD,
        };
        let ids = spec.runs();
        assert_eq!(ids.len(), 12);
        let mut seeds: Vec<u64> = ids.iter().map(|i| i.seed).collect();
        seeds.sort();
        seeds.dedup();
        assert_eq!(seeds.len(), 12);

        let out = run_sweep(&spec, &ExperimentConfig::default(), Planning::Serial, |_, _| Ok(())).unwrap();
        assert_eq!(out.runs.len(), 12);
        assert_eq!(out.aggregate.len(), 4);
        for row in &out.aggregate {
            let cell: Vec<f64> = out
                .runs
                .iter()
                .filter(|r| r.id.n_rollouts == row.n_rollouts && r.id.rollout_length == row.rollout_length)
                .map(|r| r.summary.as_ref().unwrap().sheep_eff.mean.unwrap())
                .collect();
            let m = cell.iter().sum::<f64>() / cell.len() as f64;
            assert!((row.efficiency.unwrap().mean - m).abs() < 1e-12);
            assert_eq!(row.reps, 3);
        }
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        let spec = SweepSpec {
            species: Species::Wolf,
            n_rollouts: vec![1],
            rollout_lengths: vec![1],
            repetitions: 0,
            ticks: 5,
            warmup: 0,
            base_seed: 0,
        };
        assert!(run_sweep(&spec, &ExperimentConfig::default(), Planning::Serial, |_, _| Ok(())).is_err());

        let spec = SweepSpec {
            repetitions: 1,
            ..spec
        };
        let mut base = ExperimentConfig::default();
        base.sheep = Policy::Cognitive(CognitionParams::default());
        assert!(run_sweep(&spec, &base, Planning::Serial, |_, _| Ok(())).is_err());
    }

    #[test]
    fn sweep_records_failed_runs() {
        let spec = SweepSpec {
            species: Species::Sheep,
            n_rollouts: vec![1],
            rollout_lengths: vec![0],
            repetitions: 2,
            ticks: 3,
            warmup: 0,
            base_seed: 0,
        };
        let out = run_sweep(&spec, &ExperimentConfig::default(), Planning::Serial, |id, _| {
            if id.rep == 0 {
                Err(Error::invalid("disk", "full"))
            } else {
                Ok(())
            }
        })
        .unwrap();
        assert_eq!(out.succeeded(), 1);
        assert_eq!(out.aggregate[0].failures, 1);
        assert_eq!(out.aggregate[0].reps, 1);
    }
}
