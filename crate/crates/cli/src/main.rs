use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use acmcc::config::{RunConfig, REFERENCE};
use acmcc::experiment::{
    explain_at, run_experiment, run_sweep, write_aggregate_file, write_run_files, write_sweep_run,
};
use acmcc::sim::Planning;
use acmcc::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "acmcc",
    about = "Wolf-sheep-grass simulation with Monte Carlo rollout cognition",
    after_long_help = format!("Config file keys and defaults:\n\n{REFERENCE}")
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run and write ticks.csv and summary.csv
    Run(Common),
    /// Run every cell of the config's [sweep] grid and write aggregate.csv
    Sweep(Common),
    /// Write the rollout trace behind one agent's decision
    Explain {
        #[command(flatten)]
        common: Common,
        /// Agent id (overrides explain.agent)
        #[arg(long)]
        agent: Option<u64>,
        /// Ticks completed before the decision (overrides explain.tick)
        #[arg(long)]
        tick: Option<u64>,
    },
    /// Print the version
    Version,
}

#[derive(Args)]
struct Common {
    /// TOML config file; see `acmcc --help` for the keys
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ticks: Option<u64>,
    /// Output directory
    #[arg(long, env = "ACMCC_OUTPUT_DIR")]
    out: Option<PathBuf>,
    /// Override a config key, e.g. `--set sheep.policy=cognitive`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads; defaults to the machine's parallelism
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    /// Bad config or arguments: exit 2.
    Usage(String),
    /// Anything that went wrong while running: exit 1.
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidParam { .. } | Error::ZeroSizedWorld { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(c) => cmd_run(&c),
        Command::Sweep(c) => cmd_sweep(&c),
        Command::Explain {
            common,
            agent,
            tick,
        } => cmd_explain(&common, agent, tick),
        Command::Version => {
            println!("acmcc {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Loads the config with the flag overrides applied on top of `--set`.
fn load(c: &Common, sweep: bool) -> Result<(RunConfig, PathBuf), Failure> {
    let mut overrides = c.overrides.clone();
    if let Some(seed) = c.seed {
        overrides.push(format!("seed={seed}"));
        if sweep {
            overrides.push(format!("sweep.base_seed={seed}"));
        }
    }
    if let Some(ticks) = c.ticks {
        overrides.push(format!("ticks={ticks}"));
        if sweep {
            overrides.push(format!("sweep.ticks={ticks}"));
        }
    }
    let config = RunConfig::load(&c.config, &overrides)?;
    let out = c.out.clone().unwrap_or_else(|| config.output_dir.clone());

    if let Some(threads) = c.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok((config, out))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_config_echo(config: &RunConfig, dir: &Path) -> Result<(), Failure> {
    let path = dir.join("config.toml");
    fs::write(&path, config.to_toml())
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
}

fn cmd_run(c: &Common) -> Result<(), Failure> {
    let (config, out) = load(c, false)?;
    let run = run_experiment(&config.experiment(), config.seed, Planning::Parallel)?;
    create_dir(&out)?;
    write_run_files(&run, &out)?;
    write_config_echo(&config, &out)?;

    let s = &run.summary;
    let ended = match s.extinction {
        Some(x) => format!("{} extinct at tick {}", x.species.label(), x.tick),
        None => "no extinction".into(),
    };
    println!(
        "seed {} ticks {} sheep_eff {} wolf_eff {} mean_sheep {:.1} mean_wolves {:.1} ({ended}) -> {}",
        run.seed,
        s.ticks_run,
        fmt_opt(s.sheep_eff.mean),
        fmt_opt(s.wolf_eff.mean),
        s.mean_sheep_pop,
        s.mean_wolf_pop,
        out.display()
    );
    Ok(())
}

fn cmd_sweep(c: &Common) -> Result<(), Failure> {
    let (config, out) = load(c, true)?;
    let spec = config
        .sweep
        .clone()
        .ok_or_else(|| Failure::Usage(format!("{}: no [sweep] section", c.config.display())))?;
    let base = config.sweep_base(spec.species);
    create_dir(&out)?;
    write_config_echo(&config, &out)?;

    let total = spec.runs().len();
    let done = AtomicUsize::new(0);
    let outcome = run_sweep(&spec, &base, Planning::Parallel, |id, run| {
        let result = write_sweep_run(id, run, &out);
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        eprintln!(
            "[{n}/{total}] {} {}",
            id.dir_name(),
            fmt_opt(run.summary.efficiency(spec.species))
        );
        result
    })?;
    for run in &outcome.runs {
        if let Err(e) = &run.summary {
            eprintln!("run {} failed: {e}", run.id.dir_name());
        }
    }
    write_aggregate_file(&outcome, &out)?;

    let ok = outcome.succeeded();
    println!("{ok}/{total} runs succeeded -> {}", out.join("aggregate.csv").display());
    if ok == 0 {
        return Err(Failure::Runtime("every run failed".into()));
    }
    Ok(())
}

fn cmd_explain(c: &Common, agent: Option<u64>, tick: Option<u64>) -> Result<(), Failure> {
    let (config, out) = load(c, false)?;
    let (agent, tick) = match (agent, tick, config.explain) {
        (Some(a), Some(t), _) => (a, t),
        (a, t, Some(target)) => (a.unwrap_or(target.agent), t.unwrap_or(target.tick)),
        _ => {
            return Err(Failure::Usage(
                "no explain target: pass --agent and --tick or add an [explain] section".into(),
            ))
        }
    };
    let x = explain_at(&config.experiment(), config.seed, agent, tick, Planning::Parallel)?;
    create_dir(&out)?;
    let path = out.join(format!("explain_a{agent}_t{tick}.jsonl"));
    let text = x.to_string()?;
    fs::write(&path, text)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;

    println!(
        "{} {agent} at tick {tick} chooses {}",
        x.species.label(),
        x.decision.chosen.name()
    );
    for (action, stats) in acmcc::model::Action::ALL.iter().zip(x.decision.stats) {
        println!(
            "  {:<14} samples {:>3}  mean return {}",
            action.name(),
            stats.samples,
            fmt_opt(stats.mean_return)
        );
    }
    println!("trace -> {}", path.display());
    Ok(())
}
