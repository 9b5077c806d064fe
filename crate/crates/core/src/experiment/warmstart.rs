use std::sync::Arc;

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::fqi::BehaviorPolicy;
use crate::lsvi::{estimate_optimal_value, lsvi_ucb_against, OnlineConfig, OptimalValue, RegretTrace, WarmStart};
use crate::mdp::Estimate;
use crate::seeding::derive_seed;
use crate::sim::confounded::NUM_ACTIONS;
use crate::sim::{build_warmstart_env, sample_confounded, ConfoundedEnv};

pub const MODES: [&str; 3] = ["none", "robust", "naive"];

/// Final cumulative regret of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarmstartRow {
    pub method: &'static str,
    pub trial: usize,
    pub final_cum_regret: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct WarmstartReport {
    pub env: ConfoundedEnv,
    pub optimal: OptimalValue,
    /// One entry per mode in [`MODES`] order; `Err` holds the failure message.
    pub traces: Vec<(&'static str, std::result::Result<RegretTrace, String>)>,
    pub lambda: f64,
}

impl WarmstartReport {
    pub fn rows(&self, trials: usize) -> Vec<WarmstartRow> {
        let mut rows = Vec::new();
        for (method, trace) in &self.traces {
            for trial in 0..trials {
                rows.push(match trace {
                    Ok(tr) => WarmstartRow {
                        method,
                        trial,
                        final_cum_regret: tr.cumulative(trial).last().copied(),
                        status: "ok".into(),
                    },
                    Err(e) => WarmstartRow {
                        method,
                        trial,
                        final_cum_regret: None,
                        status: format!("error: {e}"),
                    },
                });
            }
        }
        rows
    }

    pub fn failures(&self, trials: usize) -> usize {
        self.traces.iter().filter(|(_, t)| t.is_err()).count() * trials
    }

    pub fn final_regret(&self, method: &str) -> Option<Estimate> {
        self.trace(method).map(RegretTrace::final_cumulative)
    }

    pub fn trace(&self, method: &str) -> Option<&RegretTrace> {
        self.traces
            .iter()
            .find(|(m, _)| *m == method)
            .and_then(|(_, t)| t.as_ref().ok())
    }

    /// Final cumulative regret of `method` relative to standard LSVI-UCB.
    pub fn ratio(&self, method: &str) -> Option<f64> {
        Some(self.final_regret(method)?.mean / self.final_regret("none")?.mean)
    }
}

const OPTIMAL_STREAM: u64 = 0x6f70_7476;
const OFFLINE_STREAM: u64 = 0x6f66_666c;

/// Standard, robust, and naive warm-started LSVI-UCB on the confounded
/// environment, all compared with the same optimal-policy estimate.
pub fn run_warmstart(cfg: &ExperimentConfig) -> Result<WarmstartReport> {
    let mut env = build_warmstart_env(cfg.env_seed)?;
    if let Some(h) = cfg.sizes.horizon {
        env.horizon = h;
    }
    let optimal = estimate_optimal_value(&env, cfg.optimal_budget, derive_seed(cfg.seed, &[OPTIMAL_STREAM]))?;
    let comparator = optimal.policy();
    let offline = Arc::new(sample_confounded(
        &env,
        cfg.sizes.offline_episodes,
        derive_seed(cfg.seed, &[OFFLINE_STREAM]),
    )?);
    let lambda = cfg.lambdas[0];
    let traces = MODES
        .iter()
        .map(|&mode| {
            let warmstart = match mode {
                "robust" => WarmStart::Robust {
                    lambda,
                    offline: Arc::clone(&offline),
                    behavior: BehaviorPolicy::Known(vec![1.0 / NUM_ACTIONS as f64; NUM_ACTIONS]),
                    per_episode: false,
                },
                "naive" => WarmStart::Naive {
                    offline: Arc::clone(&offline),
                },
                _ => WarmStart::None,
            };
            let online = OnlineConfig {
                episodes: cfg.sizes.episodes,
                horizon: env.horizon,
                warmstart,
                trials: cfg.trials,
                seed: cfg.seed,
                rollouts_per_eval: cfg.rollouts_per_eval,
                ..OnlineConfig::default()
            };
            let trace = lsvi_ucb_against(&env, &online, &comparator).map_err(|e| e.to_string());
            if let Err(e) = &trace {
                log::error!("{mode} warm start failed: {e}");
            }
            (mode, trace)
        })
        .collect();
    Ok(WarmstartReport {
        env,
        optimal,
        traces,
        lambda,
    })
}
