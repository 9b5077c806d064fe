//! Command-line entry point for running experiment sweeps.
//!
//! Exit codes: 0 on success, 1 when some trials failed, 2 for invalid
//! configuration or arguments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use robustfqi::error::Error;
use robustfqi::experiment::{self, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "robustfqi", version, about = "Confounding-robust fitted-Q experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Robust FQE of the oracle policy at growing sample sizes.
    Oracle(Preset),
    /// Low-dimensional orthogonal vs plugin table.
    Table1(Preset),
    /// High-dimensional orthogonal vs plugin table.
    Table2(Preset),
    /// Regret of standard, robust, and naive warm-started LSVI-UCB.
    Warmstart(Preset),
    /// AR(1) robust gap against the log-Λ bound.
    Ar1(Preset),
    /// Tiny versions of every experiment, for checking an installation.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct Preset {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Offline trajectories per dataset.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated Λ grid.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Online episodes (warm-start only).
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    no_svg: bool,
}

impl Preset {
    fn config(&self, kind: ExperimentKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::preset(kind);
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.n {
            cfg.sizes.n = n;
        }
        if let Some(l) = &self.lambdas {
            cfg.lambdas.clone_from(l);
        }
        if let Some(k) = self.episodes {
            cfg.sizes.episodes = k;
        }
        cfg.svg &= !self.no_svg;
        cfg
    }
}

fn selftest_configs() -> Vec<ExperimentConfig> {
    let mut table = ExperimentConfig::preset(ExperimentKind::Table1);
    table.trials = 2;
    table.sizes.n = 200;
    table.sizes.d = Some(5);
    table.holdout = 2000;
    table.truth_samples = 2000;

    let mut warm = ExperimentConfig::preset(ExperimentKind::Warmstart);
    warm.trials = 2;
    warm.sizes.episodes = 10;
    warm.sizes.offline_episodes = 200;
    warm.rollouts_per_eval = 50;
    warm.optimal_budget = 5000;

    let mut oracle = ExperimentConfig::preset(ExperimentKind::OracleStudy);
    oracle.trials = 2;
    oracle.sizes.d = Some(5);
    oracle.sizes.n_grid = vec![200, 800];
    oracle.holdout = 2000;
    oracle.truth_samples = 2000;

    let mut ar1 = ExperimentConfig::preset(ExperimentKind::Ar1Study);
    ar1.trials = 1;
    ar1.sizes.n = 500;
    [table, warm, oracle, ar1]
        .into_iter()
        .map(|c| ExperimentConfig { svg: false, ..c })
        .collect()
}

fn execute(mut cfg: ExperimentConfig, common: &Common) -> Result<usize, Error> {
    cfg.apply_seed_override()?;
    let outcome = experiment::run(&cfg, &common.out, common.workers)?;
    print!("{}", outcome.summary);
    println!("wrote {}", outcome.out_dir.display());
    Ok(outcome.failures)
}

fn selftest(common: &Common) -> Result<usize, Error> {
    let mut failures = 0;
    for cfg in selftest_configs() {
        let dir = common.out.join(cfg.experiment.name());
        failures += execute(cfg, &Common { out: dir, ..*common })?;
    }
    Ok(failures)
}

fn load(path: &Path) -> Result<ExperimentConfig, Error> {
    ExperimentConfig::load(path)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, common } => load(config).and_then(|cfg| execute(cfg, common)),
        Command::Oracle(p) => execute(p.config(ExperimentKind::OracleStudy), &p.common),
        Command::Table1(p) => execute(p.config(ExperimentKind::Table1), &p.common),
        Command::Table2(p) => execute(p.config(ExperimentKind::Table2), &p.common),
        Command::Warmstart(p) => execute(p.config(ExperimentKind::Warmstart), &p.common),
        Command::Ar1(p) => execute(p.config(ExperimentKind::Ar1Study), &p.common),
        Command::Selftest { common } => selftest(common),
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} trials failed");
            ExitCode::from(1)
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
