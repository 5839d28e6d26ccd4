//! Command-line driver: `gen`, `train`, `eval` and `repro`.
//!
//! Settings resolve as built-in defaults, then `--config FILE`, then
//! `--set key=value` flags and the dedicated flags of each command. The
//! resolved settings are printed as a banner before any work starts; the
//! banner body is itself a valid config file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Settings;
use crate::datagen::{build_dataset, read_dataset, write_dataset, DatasetSpec, Paradigm, Sampling};
use crate::error::Error;
use crate::eval::{eval_checkpoint, write_comparison, write_report, ComparisonConfig, Experiment, GridSpec, Runner};
use crate::policy::{read_checkpoint, train_kind, write_checkpoint, PolicyKind};
use crate::rng::default_seed;
use crate::world::RandomizationLevel;

/// Exit status for usage errors: bad flags, missing inputs, bad config.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "move-bench", version, about = "Motion-augmented demonstration benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat key = value file applied over the built-in defaults.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Extra override, applied after the config file (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads for generation and evaluation [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a budget-matched dataset.
    Gen {
        #[arg(long, default_value = "static")]
        paradigm: Paradigm,
        #[arg(long, default_value = "dense")]
        sampling: Sampling,
        #[arg(long, default_value_t = 20_000)]
        budget: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        level: u8,
        /// [default: $MOVE_BENCH_SEED or 0]
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train a policy on a dataset file.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "diffusion")]
        policy: PolicyKind,
        /// Gradient steps [default: train.steps].
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a checkpoint on the object-start grid.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 13)]
        grid: usize,
        #[arg(long, default_value_t = 3)]
        episodes: usize,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        level: u8,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a canned comparison across seeds.
    Repro {
        #[arg(long)]
        experiment: Experiment,
        #[arg(long, default_value_t = 20_000)]
        budget: u64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
        #[arg(long, default_value = "diffusion")]
        policy: PolicyKind,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 13)]
        grid: usize,
        #[arg(long, default_value_t = 3)]
        episodes: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// Failure split by exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parameter(_) => CliError::Usage(e.to_string()),
            other => CliError::Run(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Run(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "error: {e}"),
        }
    }
}

fn require_file(path: &Path) -> std::result::Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("no such file: {}", path.display())))
    }
}

fn resolve(common: &Common, flags: &[(&str, String)]) -> std::result::Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        require_file(path)?;
        s.apply_file(path)?;
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        s.set(k, v)?;
    }
    for (k, v) in flags {
        s.set(k, v)?;
    }
    s.validate()?;
    Ok(s)
}

fn banner(command: &str, args: &[(&str, String)], settings: &Settings) {
    println!("# move-bench {command}");
    for (k, v) in args {
        println!("# --{k} {v}");
    }
    print!("{}", settings.to_text());
    println!("# end of configuration");
}

fn level(l: u8) -> std::result::Result<RandomizationLevel, CliError> {
    Ok(RandomizationLevel::from_index(l)?)
}

fn run_command(cmd: Command) -> std::result::Result<(), CliError> {
    match cmd {
        Command::Gen {
            paradigm,
            sampling,
            budget,
            level: l,
            seed,
            out,
            common,
        } => {
            let seed = seed.unwrap_or_else(default_seed);
            let s = resolve(&common, &[])?;
            let args = [
                ("paradigm", paradigm.to_string()),
                ("sampling", sampling.to_string()),
                ("budget", budget.to_string()),
                ("level", l.to_string()),
                ("seed", seed.to_string()),
                ("out", out.display().to_string()),
            ];
            banner("gen", &args, &s);
            let spec = DatasetSpec::new(paradigm, sampling, level(l)?, budget, seed);
            let ds = build_dataset(&spec, &s.ctx)?;
            write_dataset(&ds, &out)?;
            println!(
                "wrote {} trajectories, {} timesteps (generation success {:.3}) to {}",
                ds.trajectories.len(),
                ds.total_timesteps(),
                ds.stats.success_rate(),
                out.display()
            );
        }
        Command::Train {
            dataset,
            policy,
            steps,
            seed,
            out,
            common,
        } => {
            require_file(&dataset)?;
            let seed = seed.unwrap_or_else(default_seed);
            let mut flags = vec![("train.seed", seed.to_string())];
            if let Some(n) = steps {
                flags.push(("train.steps", n.to_string()));
            }
            let s = resolve(&common, &flags)?;
            let args = [
                ("dataset", dataset.display().to_string()),
                ("policy", policy.name().to_string()),
                ("out", out.display().to_string()),
            ];
            banner("train", &args, &s);
            let ds = read_dataset(&dataset)?;
            let (ckpt, log) = train_kind(policy, &ds, &s.train)?;
            for (step, loss) in &log.losses {
                println!("step {step:>6}  loss {loss:.5}");
            }
            write_checkpoint(&ckpt, &out)?;
            println!("wrote {} checkpoint to {}", policy.name(), out.display());
        }
        Command::Eval {
            checkpoint,
            grid,
            episodes,
            level: l,
            seed,
            out,
            common,
        } => {
            require_file(&checkpoint)?;
            let seed = seed.unwrap_or_else(default_seed);
            let s = resolve(&common, &[])?;
            let args = [
                ("checkpoint", checkpoint.display().to_string()),
                ("grid", grid.to_string()),
                ("episodes", episodes.to_string()),
                ("level", l.to_string()),
                ("seed", seed.to_string()),
                ("out", out.display().to_string()),
            ];
            banner("eval", &args, &s);
            let ckpt = read_checkpoint(&checkpoint)?;
            let spec = GridSpec::new(grid, episodes, level(l)?, seed);
            spec.validate()?;
            let report = eval_checkpoint(&ckpt, &s.ctx.world, &spec)?;
            write_report(&report, &out)?;
            println!(
                "success {:.3}  normalized score {:.3}  ({} cells) -> {}",
                report.success_rate,
                report.normalized_score,
                report.cells.len(),
                out.display()
            );
        }
        Command::Repro {
            experiment,
            budget,
            seeds,
            policy,
            steps,
            grid,
            episodes,
            out,
            common,
        } => {
            let mut flags = Vec::new();
            if let Some(n) = steps {
                flags.push(("train.steps", n.to_string()));
            }
            let s = resolve(&common, &flags)?;
            let seed_list: Vec<String> = seeds.iter().map(u64::to_string).collect();
            let args = [
                ("experiment", experiment.to_string()),
                ("budget", budget.to_string()),
                ("seeds", seed_list.join(",")),
                ("policy", policy.name().to_string()),
                ("grid", grid.to_string()),
                ("episodes", episodes.to_string()),
                ("out", out.display().to_string()),
            ];
            banner("repro", &args, &s);
            GridSpec::new(grid, episodes, RandomizationLevel::ObjectOnly, 0).validate()?;
            let runner = Runner::new(ComparisonConfig {
                ctx: s.ctx,
                policy,
                train: s.train.clone(),
                grid_resolution: grid,
                episodes_per_cell: episodes,
            });
            let report = runner.run(experiment, budget, &seeds)?;
            write_comparison(&report, &out)?;
            print!("{}", report.table());
            println!("wrote comparison to {}", out.display());
        }
    }
    Ok(())
}

fn jobs_of(cmd: &Command) -> Option<usize> {
    match cmd {
        Command::Gen { common, .. }
        | Command::Train { common, .. }
        | Command::Eval { common, .. }
        | Command::Repro { common, .. } => common.jobs,
    }
}

/// Runs a parsed command inside a worker pool sized by `--jobs`.
pub fn execute(cli: Cli) -> std::result::Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs_of(&cli.command) {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Run(Error::State(format!("thread pool: {e}"))))?;
    pool.install(|| run_command(cli.command))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
