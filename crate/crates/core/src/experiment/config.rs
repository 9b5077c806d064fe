use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::SampleMode;

/// Environment variable that replaces the configured base seed.
pub const SEED_ENV_VAR: &str = "ROBUSTFQI_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Low-dimensional table: orthogonal vs plugin robust FQI over a `Λ` grid.
    Table1,
    /// High-dimensional table.
    Table2,
    /// Regret of standard, robust, and naive warm-started LSVI-UCB.
    Warmstart,
    /// Robust FQE of the oracle's greedy policy at growing sample sizes.
    OracleStudy,
    /// Exact AR(1) gaps against the log-`Λ` bound, with robust FQI estimates.
    Ar1Study,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Table1 => "table1",
            ExperimentKind::Table2 => "table2",
            ExperimentKind::Warmstart => "warmstart",
            ExperimentKind::OracleStudy => "oracle_study",
            ExperimentKind::Ar1Study => "ar1_study",
        }
    }
}

/// Problem sizes. Unused entries are ignored by experiments that do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sizes {
    /// Offline trajectories per dataset.
    pub n: usize,
    /// State dimension; `None` keeps the environment's own.
    #[serde(default)]
    pub d: Option<usize>,
    /// Horizon; `None` keeps the environment's own.
    #[serde(default)]
    pub horizon: Option<usize>,
    /// Online episodes per LSVI-UCB trial.
    #[serde(default)]
    pub episodes: usize,
    /// Confounded offline episodes for warm-starting.
    #[serde(default)]
    pub offline_episodes: usize,
    /// Dataset sizes for the oracle study.
    #[serde(default)]
    pub n_grid: Vec<usize>,
}

/// One experiment sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// `Λ` grid; the warm-start experiment uses its first entry.
    pub lambdas: Vec<f64>,
    /// Number of independent seeds per grid point.
    pub trials: usize,
    /// Base seed for datasets and per-trial streams.
    pub seed: u64,
    /// Seed for the environment parameters.
    #[serde(default)]
    pub env_seed: u64,
    pub sizes: Sizes,
    /// Holdout initial states for the value and action metrics.
    #[serde(default = "default_holdout")]
    pub holdout: usize,
    /// Initial-state draws for the oracle linearization.
    #[serde(default = "default_truth_samples")]
    pub truth_samples: usize,
    #[serde(default = "default_folds")]
    pub crossfit_folds: usize,
    #[serde(default)]
    pub sample_mode: SampleMode,
    /// Monte-Carlo rollouts per regret evaluation.
    #[serde(default = "default_rollouts")]
    pub rollouts_per_eval: usize,
    /// Uniform-policy episodes behind the optimal value estimate.
    #[serde(default = "default_optimal_budget")]
    pub optimal_budget: usize,
    /// AR(1) grid: `θ_P` values and horizons.
    #[serde(default)]
    pub ar1_theta_p: Vec<f64>,
    #[serde(default)]
    pub ar1_horizons: Vec<usize>,
    /// Also write SVG figures.
    #[serde(default = "default_true")]
    pub svg: bool,
}

fn default_holdout() -> usize {
    200_000
}

fn default_truth_samples() -> usize {
    crate::sim::DEFAULT_LINEARIZATION_SAMPLES
}

fn default_folds() -> usize {
    1
}

fn default_rollouts() -> usize {
    1000
}

fn default_optimal_budget() -> usize {
    crate::lsvi::DEFAULT_OPTIMAL_BUDGET
}

fn default_true() -> bool {
    true
}

const TABLE_GRID: [f64; 6] = [1.0, 2.0, 5.25, 8.5, 11.75, 15.0];

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn preset(kind: ExperimentKind) -> Self {
        let sizes = |n: usize| Sizes {
            n,
            d: None,
            horizon: None,
            episodes: 0,
            offline_episodes: 0,
            n_grid: Vec::new(),
        };
        let base = Self {
            experiment: kind,
            lambdas: TABLE_GRID.to_vec(),
            trials: 20,
            seed: 0,
            env_seed: 0,
            sizes: sizes(5000),
            holdout: default_holdout(),
            truth_samples: default_truth_samples(),
            crossfit_folds: 1,
            sample_mode: SampleMode::Chunked,
            rollouts_per_eval: default_rollouts(),
            optimal_budget: default_optimal_budget(),
            ar1_theta_p: Vec::new(),
            ar1_horizons: Vec::new(),
            svg: true,
        };
        match kind {
            ExperimentKind::Table1 => base,
            ExperimentKind::Table2 => Self {
                sizes: sizes(600),
                ..base
            },
            ExperimentKind::Warmstart => Self {
                lambdas: vec![3.0],
                trials: 50,
                sizes: Sizes {
                    episodes: 250,
                    offline_episodes: 5000,
                    ..sizes(0)
                },
                ..base
            },
            ExperimentKind::OracleStudy => Self {
                lambdas: vec![1.0, 2.0, 8.5],
                trials: 5,
                sizes: Sizes {
                    n_grid: vec![1000, 4000, 16_000, 64_000],
                    ..sizes(0)
                },
                holdout: 20_000,
                ..base
            },
            ExperimentKind::Ar1Study => Self {
                lambdas: vec![2.0, 5.0, 15.0],
                trials: 5,
                sizes: sizes(5000),
                ar1_theta_p: vec![0.5, 0.9, 1.0, 1.3],
                ar1_horizons: vec![2, 4, 8],
                ..base
            },
        }
    }

    /// Parses and validates a JSON config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Replaces the seed with `ROBUSTFQI_SEED` when it is set.
    pub fn apply_seed_override(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV_VAR) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV_VAR}={v:?} is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.lambdas.is_empty() {
            return fail("the Λ grid is empty".into());
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l >= 1.0) || !l.is_finite()) {
            return fail(format!("Λ values must be finite and ≥ 1, got {l}"));
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.sizes.d == Some(0) || self.sizes.horizon == Some(0) {
            return fail("d and horizon must be positive".into());
        }
        if self.crossfit_folds == 0 {
            return fail("crossfit_folds must be at least 1".into());
        }
        match self.experiment {
            ExperimentKind::Table1 | ExperimentKind::Table2 => {
                if self.sizes.n == 0 || self.holdout == 0 || self.truth_samples == 0 {
                    return fail("n, holdout, and truth_samples must be positive".into());
                }
                if self.experiment == ExperimentKind::Table2 && self.sizes.d.is_some() {
                    return fail("table2 uses the fixed 100-dimensional environment; drop sizes.d".into());
                }
            }
            ExperimentKind::Warmstart => {
                if self.sizes.episodes == 0 || self.sizes.offline_episodes == 0 {
                    return fail("warmstart needs sizes.episodes and sizes.offline_episodes".into());
                }
                if self.rollouts_per_eval == 0 || self.optimal_budget == 0 {
                    return fail("rollouts_per_eval and optimal_budget must be positive".into());
                }
                if self.sizes.d.is_some() {
                    return fail("warmstart uses the fixed 8-dimensional environment; drop sizes.d".into());
                }
            }
            ExperimentKind::OracleStudy => {
                if self.sizes.n_grid.is_empty() || self.sizes.n_grid.contains(&0) {
                    return fail("oracle_study needs a nonempty sizes.n_grid of positive sizes".into());
                }
                if self.holdout == 0 || self.truth_samples == 0 {
                    return fail("holdout and truth_samples must be positive".into());
                }
            }
            ExperimentKind::Ar1Study => {
                if self.ar1_theta_p.is_empty() || self.ar1_horizons.is_empty() {
                    return fail("ar1_study needs ar1_theta_p and ar1_horizons".into());
                }
                if self.ar1_theta_p.iter().any(|&p| !(p > 0.0)) || self.ar1_horizons.contains(&0) {
                    return fail("θ_P must be positive and horizons at least 1".into());
                }
                if self.sizes.n == 0 {
                    return fail("sizes.n must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON used for the config hash.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Hex SHA-256 of the canonical JSON.
    pub fn hash(&self) -> Result<String> {
        use sha2::{Digest, Sha256};
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(self)?)))
    }
}
