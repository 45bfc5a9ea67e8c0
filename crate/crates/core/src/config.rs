//! TOML run configuration.
//!
//! Every key is optional and falls back to the value shown in [`REFERENCE`].
//! Unknown keys are errors. Overrides of the form `section.key=value` are
//! applied on top of the file before it is interpreted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cognition::CognitionParams;
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, SweepSpec};
use crate::model::{ModelParams, Policy, SpeciesParams};
use crate::sim::{AgentId, Dims, RngAlgorithm, Species};

/// An annotated config file listing every key with its default.
pub const REFERENCE: &str = r#"# All keys are optional; the values below are the defaults.

seed = 0              # the only source of randomness
ticks = 2000          # ticks per run
warmup = 500          # first tick counted in mean populations
rng = "chacha8"       # stream generator; chacha8 is the only one
output_dir = "out"    # overridden by ACMCC_OUTPUT_DIR and --out

[world]
width = 51
height = 51
wrap = true           # torus when true, walls when false

[model]
grass_regrowth_time = 30      # ticks a grazed patch stays bare
move_cost = 1.0               # energy paid per step
initial_grass_fraction = 0.5

# [sheep] and [wolves] share the same keys. The rollout keys are used when
# policy = "cognitive", and by sweeps over that species.
[sheep]
initial_count = 100
gain_from_food = 4.0
reproduce_prob = 0.04
policy = "random"     # "random" or "cognitive"
n_rollouts = 20       # rollouts per decision
rollout_length = 3    # ticks per rollout
vision_radius = 5.0   # in patches
discount = 0.9
death_reward = -1000.0

[wolves]
initial_count = 50
gain_from_food = 20.0
reproduce_prob = 0.05
policy = "random"
n_rollouts = 20
rollout_length = 3
vision_radius = 5.0
discount = 0.9
death_reward = -1000.0

# Optional. Target of `acmcc explain`; no default target.
# [explain]
# agent = 0
# tick = 0

# Optional. Read by `acmcc sweep`. Missing ticks, warmup and base_seed take the
# top-level ticks, warmup and seed.
# [sweep]
# species = "sheep"     # "sheep" or "wolves"
# n_rollouts = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20]
# rollout_lengths = [0, 1, 2, 3, 4, 5]
# repetitions = 20
# ticks = 2000
# warmup = 500
# base_seed = 0
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    #[default]
    Random,
    Cognitive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesConfig {
    pub params: SpeciesParams,
    pub policy: PolicyKind,
    /// Kept for random species too, as the template for sweeps.
    pub cognition: CognitionParams,
}

impl SpeciesConfig {
    pub fn policy(&self) -> Policy {
        match self.policy {
            PolicyKind::Random => Policy::Random,
            PolicyKind::Cognitive => Policy::Cognitive(self.cognition),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplainTarget {
    pub agent: AgentId,
    pub tick: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub ticks: u64,
    pub warmup: u64,
    pub rng: RngAlgorithm,
    pub output_dir: PathBuf,
    pub dims: Dims,
    pub grass_regrowth_time: u32,
    pub move_cost: f64,
    pub initial_grass_fraction: f64,
    pub sheep: SpeciesConfig,
    pub wolves: SpeciesConfig,
    pub explain: Option<ExplainTarget>,
    pub sweep: Option<SweepSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = ModelParams::default();
        let e = ExperimentConfig::default();
        let species = |params| SpeciesConfig {
            params,
            policy: PolicyKind::Random,
            cognition: CognitionParams::default(),
        };
        Self {
            seed: 0,
            ticks: e.ticks,
            warmup: e.warmup,
            rng: RngAlgorithm::Chacha8,
            output_dir: PathBuf::from("out"),
            dims: m.dims,
            grass_regrowth_time: m.grass_regrowth_time,
            move_cost: m.move_cost,
            initial_grass_fraction: m.initial_grass_fraction,
            sheep: species(m.sheep),
            wolves: species(m.wolves),
            explain: None,
            sweep: None,
        }
    }
}

impl RunConfig {
    /// Reads `path`, applies `overrides` and checks the result.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: format!("cannot read file: {e}"),
        })?;
        Self::parse(&text, path, overrides)
    }

    /// Like [`RunConfig::load`] with the text already in hand. `path` is only
    /// used in messages.
    pub fn parse(text: &str, path: &Path, overrides: &[String]) -> Result<Self> {
        let err = |message: String| Error::Config {
            path: path.to_path_buf(),
            message,
        };
        // parsing the text directly keeps line numbers in the diagnostics
        let mut raw: RawConfig = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        if !overrides.is_empty() {
            let mut table: toml::Table = toml::from_str(text).map_err(|e| err(e.to_string()))?;
            for o in overrides {
                apply_override(&mut table, o).map_err(err)?;
            }
            raw = toml::Value::Table(table)
                .try_into()
                .map_err(|e: toml::de::Error| err(format!("after --set overrides: {e}")))?;
        }
        let config = raw.resolve();
        config.validate().map_err(|e| err(e.to_string()))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.experiment().validate()?;
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        Ok(())
    }

    pub fn model(&self) -> ModelParams {
        ModelParams {
            dims: self.dims,
            sheep: self.sheep.params,
            wolves: self.wolves.params,
            grass_regrowth_time: self.grass_regrowth_time,
            move_cost: self.move_cost,
            initial_grass_fraction: self.initial_grass_fraction,
        }
    }

    pub fn species(&self, species: Species) -> &SpeciesConfig {
        match species {
            Species::Sheep => &self.sheep,
            Species::Wolf => &self.wolves,
        }
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            model: self.model(),
            sheep: self.sheep.policy(),
            wolves: self.wolves.policy(),
            ticks: self.ticks,
            warmup: self.warmup,
        }
    }

    /// Base config for a sweep: the swept species takes its rollout keys
    /// as the template for every cell.
    pub fn sweep_base(&self, species: Species) -> ExperimentConfig {
        let mut base = self.experiment();
        *base.policy_mut(species) = Policy::Cognitive(self.species(species).cognition);
        base
    }

    /// The resolved config as TOML, every key spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(&RawConfig::from(self)).expect("config serializes")
    }
}

/// Sets `key=value` inside `table`. The value is read as a TOML value when it
/// parses as one and as a bare string otherwise, so `sheep.policy=cognitive`
/// works without quotes.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> std::result::Result<(), String> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override `{assignment}` is not of the form key=value"))?;
    let key = key.trim();
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));

    let mut parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("override key `{key}` is malformed"));
    }
    let last = parts.pop().expect("split yields at least one part");
    let mut here = table;
    for part in parts {
        here = here
            .entry(part)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| format!("override key `{key}`: `{part}` is not a section"))?;
    }
    here.insert(last.to_string(), parsed);
    Ok(())
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    ticks: Option<u64>,
    warmup: Option<u64>,
    rng: Option<RngAlgorithm>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    world: RawWorld,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    sheep: RawSpecies,
    #[serde(default)]
    wolves: RawSpecies,
    explain: Option<ExplainTarget>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorld {
    width: Option<usize>,
    height: Option<usize>,
    wrap: Option<bool>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    grass_regrowth_time: Option<u32>,
    move_cost: Option<f64>,
    initial_grass_fraction: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpecies {
    initial_count: Option<usize>,
    gain_from_food: Option<f64>,
    reproduce_prob: Option<f64>,
    policy: Option<PolicyKind>,
    n_rollouts: Option<u32>,
    rollout_length: Option<u32>,
    vision_radius: Option<f64>,
    discount: Option<f64>,
    death_reward: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    species: Species,
    n_rollouts: Option<Vec<u32>>,
    rollout_lengths: Option<Vec<u32>>,
    repetitions: Option<u32>,
    ticks: Option<u64>,
    warmup: Option<u64>,
    base_seed: Option<u64>,
}

impl RawSpecies {
    fn resolve(self, d: SpeciesConfig) -> SpeciesConfig {
        SpeciesConfig {
            params: SpeciesParams {
                initial_count: self.initial_count.unwrap_or(d.params.initial_count),
                gain_from_food: self.gain_from_food.unwrap_or(d.params.gain_from_food),
                reproduce_prob: self.reproduce_prob.unwrap_or(d.params.reproduce_prob),
            },
            policy: self.policy.unwrap_or(d.policy),
            cognition: CognitionParams {
                n_rollouts: self.n_rollouts.unwrap_or(d.cognition.n_rollouts),
                rollout_length: self.rollout_length.unwrap_or(d.cognition.rollout_length),
                vision_radius: self.vision_radius.unwrap_or(d.cognition.vision_radius),
                discount: self.discount.unwrap_or(d.cognition.discount),
                death_reward: self.death_reward.unwrap_or(d.cognition.death_reward),
            },
        }
    }
}

impl From<&SpeciesConfig> for RawSpecies {
    fn from(s: &SpeciesConfig) -> Self {
        Self {
            initial_count: Some(s.params.initial_count),
            gain_from_food: Some(s.params.gain_from_food),
            reproduce_prob: Some(s.params.reproduce_prob),
            policy: Some(s.policy),
            n_rollouts: Some(s.cognition.n_rollouts),
            rollout_length: Some(s.cognition.rollout_length),
            vision_radius: Some(s.cognition.vision_radius),
            discount: Some(s.cognition.discount),
            death_reward: Some(s.cognition.death_reward),
        }
    }
}

impl RawConfig {
    fn resolve(self) -> RunConfig {
        let d = RunConfig::default();
        let seed = self.seed.unwrap_or(d.seed);
        let ticks = self.ticks.unwrap_or(d.ticks);
        let warmup = self.warmup.unwrap_or(d.warmup);
        let sweep = self.sweep.map(|s| SweepSpec {
            species: s.species,
            n_rollouts: s.n_rollouts.unwrap_or_else(|| (1..=20).collect()),
            rollout_lengths: s.rollout_lengths.unwrap_or_else(|| (0..=5).collect()),
            repetitions: s.repetitions.unwrap_or(20),
            ticks: s.ticks.unwrap_or(ticks),
            warmup: s.warmup.unwrap_or(warmup),
            base_seed: s.base_seed.unwrap_or(seed),
        });
        RunConfig {
            seed,
            ticks,
            warmup,
            rng: self.rng.unwrap_or(d.rng),
            output_dir: self.output_dir.unwrap_or(d.output_dir),
            dims: Dims::new(
                self.world.width.unwrap_or(d.dims.width),
                self.world.height.unwrap_or(d.dims.height),
                self.world.wrap.unwrap_or(d.dims.wrap),
            ),
            grass_regrowth_time: self
                .model
                .grass_regrowth_time
                .unwrap_or(d.grass_regrowth_time),
            move_cost: self.model.move_cost.unwrap_or(d.move_cost),
            initial_grass_fraction: self
                .model
                .initial_grass_fraction
                .unwrap_or(d.initial_grass_fraction),
            sheep: self.sheep.resolve(d.sheep),
            wolves: self.wolves.resolve(d.wolves),
            explain: self.explain,
            sweep,
        }
    }
}

impl From<&RunConfig> for RawConfig {
    fn from(c: &RunConfig) -> Self {
        Self {
            seed: Some(c.seed),
            ticks: Some(c.ticks),
            warmup: Some(c.warmup),
            rng: Some(c.rng),
            output_dir: Some(c.output_dir.clone()),
            world: RawWorld {
                width: Some(c.dims.width),
                height: Some(c.dims.height),
                wrap: Some(c.dims.wrap),
            },
            model: RawModel {
                grass_regrowth_time: Some(c.grass_regrowth_time),
                move_cost: Some(c.move_cost),
                initial_grass_fraction: Some(c.initial_grass_fraction),
            },
            sheep: (&c.sheep).into(),
            wolves: (&c.wolves).into(),
            explain: c.explain,
            sweep: c.sweep.as_ref().map(|s| RawSweep {
                species: s.species,
                n_rollouts: Some(s.n_rollouts.clone()),
                rollout_lengths: Some(s.rollout_lengths.clone()),
                repetitions: Some(s.repetitions),
                ticks: Some(s.ticks),
                warmup: Some(s.warmup),
                base_seed: Some(s.base_seed),
            }),
        }
    }
}
