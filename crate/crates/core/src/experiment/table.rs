use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use super::metrics::{draw_holdout, metric_mse_v0, metric_param_err, metric_pct_wrong};
use crate::error::Result;
use crate::fqi::{robust_fqi, robust_fqi_crossfit, BehaviorPolicy, FqiConfig};
use crate::mdp::{Estimate, QFunction};
use crate::seeding::derive_seed;
use crate::sim::{
    build_highdim_env, build_lowdim_env, build_lowdim_env_with_dim, ground_truth_grid, sample_offline, GroundTruth,
    LinearGaussianEnv,
};

pub const METHODS: [&str; 2] = ["orthogonal", "plugin"];

/// One `(Λ, method, seed)` row of a table report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub lambda: f64,
    pub method: &'static str,
    pub trial: usize,
    pub seed: u64,
    pub mse_v0: Option<f64>,
    pub param_err: Option<f64>,
    pub pct_wrong_action: Option<f64>,
    /// `ok`, or `error: <message>`.
    pub status: String,
}

/// Mean and standard error of each metric over the successful rows of one `(Λ, method)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    pub lambda: f64,
    pub method: &'static str,
    pub n_ok: usize,
    pub mse_v0: f64,
    pub mse_v0_se: f64,
    pub param_err: f64,
    pub param_err_se: f64,
    pub pct_wrong_action: f64,
    pub pct_wrong_action_se: f64,
}

#[derive(Debug, Clone)]
pub struct TableReport {
    pub env: LinearGaussianEnv,
    pub truths: Vec<GroundTruth>,
    /// Sorted by `(Λ, method, trial)`.
    pub rows: Vec<TableRow>,
    /// Orthogonal fits of the first trial, one per `Λ`, for figures.
    pub first_fits: Vec<Option<QFunction>>,
    pub holdout: Vec<Vec<f64>>,
}

impl TableReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status != "ok").count()
    }

    pub fn cells(&self) -> Vec<TableCell> {
        let mut cells = Vec::new();
        for truth in &self.truths {
            for method in METHODS {
                let ok: Vec<&TableRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.lambda == truth.lambda && r.method == method && r.status == "ok")
                    .collect();
                let est = |f: fn(&TableRow) -> Option<f64>| {
                    Estimate::from_samples(&ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
                };
                let (mse, perr, wrong) = (est(|r| r.mse_v0), est(|r| r.param_err), est(|r| r.pct_wrong_action));
                cells.push(TableCell {
                    lambda: truth.lambda,
                    method,
                    n_ok: ok.len(),
                    mse_v0: mse.mean,
                    mse_v0_se: mse.se,
                    param_err: perr.mean,
                    param_err_se: perr.se,
                    pct_wrong_action: wrong.mean,
                    pct_wrong_action_se: wrong.se,
                });
            }
        }
        cells
    }

    /// Paired per-trial metric values of one method at one `Λ`, indexed by trial.
    pub fn metric_by_trial(&self, lambda: f64, method: &str, f: fn(&TableRow) -> Option<f64>) -> Vec<Option<f64>> {
        let mut out = vec![None; self.rows.iter().map(|r| r.trial + 1).max().unwrap_or(0)];
        for r in self.rows.iter().filter(|r| r.lambda == lambda && r.method == method) {
            out[r.trial] = f(r);
        }
        out
    }
}

/// Environment of a table experiment with the configured dimension and horizon.
pub fn table_env(cfg: &ExperimentConfig) -> Result<LinearGaussianEnv> {
    let mut env = match (cfg.experiment, cfg.sizes.d) {
        (ExperimentKind::Table2, _) => build_highdim_env(cfg.env_seed)?,
        (_, Some(d)) if d != 25 => build_lowdim_env_with_dim(d, cfg.env_seed)?,
        _ => build_lowdim_env(cfg.env_seed)?,
    };
    if let Some(h) = cfg.sizes.horizon {
        env.horizon = h;
    }
    Ok(env)
}

const TRUTH_STREAM: u64 = 0x7472_7574;
const HOLDOUT_STREAM: u64 = 0x686f_6c64;

/// Orthogonal and plugin robust FQI over the `Λ` grid, one dataset per trial
/// shared by every `(Λ, method)`.
pub fn run_table(cfg: &ExperimentConfig) -> Result<TableReport> {
    let env = table_env(cfg)?;
    let truths = ground_truth_grid(
        &env,
        &cfg.lambdas,
        cfg.truth_samples,
        derive_seed(cfg.seed, &[TRUTH_STREAM]),
    )?;
    let holdout = draw_holdout(&env, cfg.holdout, derive_seed(cfg.seed, &[HOLDOUT_STREAM]));
    let per_trial: Vec<Vec<(TableRow, Option<QFunction>)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, &env, &truths, &holdout, trial))
        .collect();
    let mut rows: Vec<(TableRow, Option<QFunction>)> = per_trial.into_iter().flatten().collect();
    rows.sort_by(|(a, _), (b, _)| {
        a.lambda
            .total_cmp(&b.lambda)
            .then(
                METHODS
                    .iter()
                    .position(|m| *m == a.method)
                    .cmp(&METHODS.iter().position(|m| *m == b.method)),
            )
            .then(a.trial.cmp(&b.trial))
    });
    let first_fits = cfg
        .lambdas
        .iter()
        .map(|&l| {
            rows.iter()
                .find(|(r, _)| r.lambda == l && r.method == METHODS[0] && r.trial == 0)
                .and_then(|(_, q)| q.clone())
        })
        .collect();
    Ok(TableReport {
        env,
        truths,
        rows: rows.into_iter().map(|(r, _)| r).collect(),
        first_fits,
        holdout,
    })
}

fn run_trial(
    cfg: &ExperimentConfig,
    env: &LinearGaussianEnv,
    truths: &[GroundTruth],
    holdout: &[Vec<f64>],
    trial: usize,
) -> Vec<(TableRow, Option<QFunction>)> {
    let seed = derive_seed(cfg.seed, &[trial as u64]);
    let row = |lambda: f64, method: &'static str, status: String| TableRow {
        lambda,
        method,
        trial,
        seed,
        mse_v0: None,
        param_err: None,
        pct_wrong_action: None,
        status,
    };
    let ds = match sample_offline(env, cfg.sizes.n, cfg.sample_mode, seed) {
        Ok(ds) => ds,
        Err(e) => {
            return truths
                .iter()
                .flat_map(|t| METHODS.map(|m| (row(t.lambda, m, format!("error: {e}")), None)))
                .collect()
        }
    };
    let mut out = Vec::with_capacity(truths.len() * METHODS.len());
    for truth in truths {
        for method in METHODS {
            let fqi = FqiConfig {
                orthogonal: method == "orthogonal",
                gamma: env.gamma,
                behavior_policy: BehaviorPolicy::Known(vec![1.0 - env.behavior_p1, env.behavior_p1]),
                crossfit_folds: cfg.crossfit_folds,
                seed,
                ..FqiConfig::default()
            }
            .with_lambda(truth.lambda);
            let fit = if cfg.crossfit_folds > 1 {
                robust_fqi_crossfit(&ds, &fqi)
            } else {
                robust_fqi(&ds, &fqi)
            };
            let scored = fit.and_then(|fit| {
                let perr = metric_param_err(&fit.q, truth)?;
                Ok((fit.q, perr))
            });
            match scored {
                Ok((q, perr)) => {
                    let mut r = row(truth.lambda, method, "ok".into());
                    r.mse_v0 = Some(metric_mse_v0(&q, truth, holdout));
                    r.pct_wrong_action = Some(metric_pct_wrong(&q, truth, holdout));
                    r.param_err = Some(perr);
                    out.push((r, (trial == 0).then_some(q)));
                }
                Err(e) => out.push((row(truth.lambda, method, format!("error: {e}")), None)),
            }
        }
    }
    out
}
