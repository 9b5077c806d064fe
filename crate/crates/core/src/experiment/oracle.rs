use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::metrics::draw_holdout;
use super::table::table_env;
use crate::error::Result;
use crate::fqi::{robust_fqe, BehaviorPolicy, FqiConfig};
use crate::mdp::{Estimate, Policy};
use crate::seeding::derive_seed;
use crate::sim::{ground_truth_grid, sample_offline, GroundTruth, LinearGaussianEnv};

/// Robust FQE of the oracle policy at one `(Λ, n, trial)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub lambda: f64,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    /// Mean over holdout states of `(V̂_0(s) − V̄*_0(s))²`.
    pub mse_v0: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCell {
    pub lambda: f64,
    pub n: usize,
    pub n_ok: usize,
    pub mse_v0: f64,
    pub mse_v0_se: f64,
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub env: LinearGaussianEnv,
    pub truths: Vec<GroundTruth>,
    /// Sorted by `(Λ, n, trial)`.
    pub rows: Vec<OracleRow>,
    pub holdout: Vec<Vec<f64>>,
}

impl OracleReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status != "ok").count()
    }

    pub fn cells(&self, n_grid: &[usize]) -> Vec<OracleCell> {
        let mut out = Vec::new();
        for truth in &self.truths {
            for &n in n_grid {
                let vals: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.lambda == truth.lambda && r.n == n)
                    .filter_map(|r| r.mse_v0)
                    .collect();
                let e = Estimate::from_samples(&vals);
                out.push(OracleCell {
                    lambda: truth.lambda,
                    n,
                    n_ok: vals.len(),
                    mse_v0: e.mean,
                    mse_v0_se: e.se,
                });
            }
        }
        out
    }
}

/// The oracle's robust optimal value is recovered by robust FQE of its own
/// greedy policy, with error shrinking as the dataset grows.
pub fn run_oracle_study(cfg: &ExperimentConfig) -> Result<OracleReport> {
    let env = table_env(cfg)?;
    let truths = ground_truth_grid(
        &env,
        &cfg.lambdas,
        cfg.truth_samples,
        derive_seed(cfg.seed, &[0x7472_7574]),
    )?;
    let holdout = draw_holdout(&env, cfg.holdout, derive_seed(cfg.seed, &[0x686f_6c64]));
    let units: Vec<(usize, usize, usize)> = (0..truths.len())
        .flat_map(|li| {
            cfg.sizes
                .n_grid
                .iter()
                .enumerate()
                .flat_map(move |(ni, _)| (0..cfg.trials).map(move |trial| (li, ni, trial)))
        })
        .collect();
    let rows = units
        .into_par_iter()
        .map(|(li, ni, trial)| {
            let truth = &truths[li];
            let n = cfg.sizes.n_grid[ni];
            let seed = derive_seed(cfg.seed, &[trial as u64, n as u64]);
            let actions = truth.optimal_actions.clone();
            let policy = Policy::fixed(2, move |t, _| actions[t]);
            let fqi = FqiConfig {
                gamma: env.gamma,
                behavior_policy: BehaviorPolicy::Known(vec![1.0 - env.behavior_p1, env.behavior_p1]),
                seed,
                ..FqiConfig::default()
            }
            .with_lambda(truth.lambda);
            let fit = sample_offline(&env, n, cfg.sample_mode, seed).and_then(|ds| robust_fqe(&ds, &policy, &fqi));
            let (mse_v0, status) = match fit {
                Ok(fit) => {
                    let a0 = truth.optimal_actions[0];
                    let mse = holdout
                        .iter()
                        .map(|s| (fit.q.value(0, s, a0) - truth.value(0, s)).powi(2))
                        .sum::<f64>()
                        / holdout.len() as f64;
                    (Some(mse), "ok".to_string())
                }
                Err(e) => (None, format!("error: {e}")),
            };
            OracleRow {
                lambda: truth.lambda,
                n,
                trial,
                seed,
                mse_v0,
                status,
            }
        })
        .collect();
    Ok(OracleReport {
        env,
        truths,
        rows,
        holdout,
    })
}
