//! Optimistic online RL on the marginal MDP: LSVI-UCB with block one-hot
//! linear features, optionally warm-started from confounded offline data,
//! with Monte-Carlo regret accounting.

mod config;
mod optimistic;
mod regret;

use std::sync::Arc;

use rayon::prelude::*;

pub use config::{OnlineConfig, WarmStart};
pub use optimistic::{Learner, OptimisticQ};
pub use regret::{estimate_optimal_value, per_episode_regret, OptimalValue, RegretTrace};

use crate::error::{Error, Result};
use crate::fqi::{robust_fqe, robust_fqi, BehaviorPolicy, FqiConfig};
use crate::mdp::{Environment, Policy, QFunction, TrajectoryDataset};
use crate::robust::Bound;
use crate::seeding::{derive_seed, rng_for};
use crate::sim::ConfoundedEnv;

/// Default number of uniform-policy episodes behind the optimal value estimate.
pub const DEFAULT_OPTIMAL_BUDGET: usize = 200_000;

/// Runs `cfg.trials` independent LSVI-UCB trials on `env` and records the
/// per-episode regret against an estimate of the optimal policy.
pub fn lsvi_ucb(env: &ConfoundedEnv, cfg: &OnlineConfig) -> Result<RegretTrace> {
    let optimal = estimate_optimal_value(env, DEFAULT_OPTIMAL_BUDGET, derive_seed(cfg.seed, &[0x6f70_7476]))?;
    lsvi_ucb_against(env, cfg, &optimal.policy())
}

/// [`lsvi_ucb`] with a given comparator policy.
///
/// Regret rollouts for trial `i` and episode `k` use the same random numbers
/// for every warm-start mode, so runs that differ only in `cfg.warmstart` are
/// compared on common random numbers.
pub fn lsvi_ucb_against(env: &ConfoundedEnv, cfg: &OnlineConfig, optimal: &Policy) -> Result<RegretTrace> {
    cfg.validate()?;
    if cfg.horizon != env.horizon() {
        return Err(Error::InvalidInput(format!(
            "config horizon {} differs from the environment's {}",
            cfg.horizon,
            env.horizon()
        )));
    }
    if optimal.num_actions() != env.num_actions() {
        return Err(Error::Dimension {
            context: "lsvi_ucb: comparator actions",
            expected: env.num_actions(),
            actual: optimal.num_actions(),
        });
    }
    let cap = value_caps(env, cfg);
    let upper = match &cfg.warmstart {
        WarmStart::Robust {
            lambda,
            offline,
            behavior,
            per_episode: false,
        } => robust_upper(offline, *lambda, behavior, None)?,
        _ => None,
    };
    let inst = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(env, cfg, optimal, &cap, upper.clone(), trial as u64))
        .collect::<Result<Vec<_>>>()?;
    let trace = RegretTrace { inst };
    let clipped = trace.clipped();
    if clipped > 0 {
        log::info!(
            "{} warm start: clipped {clipped} negative regret estimates to 0",
            cfg.warmstart.label()
        );
    }
    Ok(trace)
}

/// Value cap `V_max = T·r_max` at every step, for the per-step reward bound `r_max`.
pub fn value_caps(env: &ConfoundedEnv, cfg: &OnlineConfig) -> Vec<f64> {
    let bound = cfg
        .reward_bound
        .unwrap_or_else(|| env.reward_envelope(0.999, 20_000, derive_seed(cfg.seed, &[0x656e_766c])));
    vec![cfg.horizon as f64 * bound; cfg.horizon]
}

/// Upper robust Q-function from offline data: robust FQI, or robust FQE of
/// `policy` when given. An empty dataset carries no information and yields
/// no bound.
pub fn robust_upper(
    offline: &TrajectoryDataset,
    lambda: f64,
    behavior: &BehaviorPolicy,
    policy: Option<&Policy>,
) -> Result<Option<Arc<QFunction>>> {
    if offline.is_empty() {
        return Ok(None);
    }
    let cfg = FqiConfig {
        bound: Bound::Upper,
        behavior_policy: behavior.clone(),
        ..FqiConfig::default()
    }
    .with_lambda(lambda);
    let fit = match policy {
        Some(p) => robust_fqe(offline, p, &cfg)?,
        None => robust_fqi(offline, &cfg)?,
    };
    Ok(Some(Arc::new(fit.q)))
}

fn greedy(q: &Arc<OptimisticQ>) -> Policy {
    let q = Arc::clone(q);
    Policy::fixed(q.num_actions(), move |t, s| q.greedy_action(t, s))
}

fn run_trial(
    env: &ConfoundedEnv,
    cfg: &OnlineConfig,
    optimal: &Policy,
    cap: &[f64],
    mut upper: Option<Arc<QFunction>>,
    trial: u64,
) -> Result<Vec<f64>> {
    let (d, na, horizon) = (env.state_dim(), env.num_actions(), cfg.horizon);
    let mut rng = rng_for(derive_seed(cfg.seed, &[trial]), 0x6c73_7669);
    let mut learner = Learner::new(d, na, horizon, cfg.xi, cfg.lam);
    if let WarmStart::Naive { offline } = &cfg.warmstart {
        learner.push_dataset(offline)?;
    }
    let mut previous: Option<Policy> = None;
    let mut inst = Vec::with_capacity(cfg.episodes);
    for k in 0..cfg.episodes {
        if let WarmStart::Robust {
            lambda,
            offline,
            behavior,
            per_episode: true,
        } = &cfg.warmstart
        {
            upper = robust_upper(offline, *lambda, behavior, previous.as_ref())?;
        }
        let q = Arc::new(learner.plan(upper.clone(), cap)?);
        let mut s = env.initial_state(&mut rng);
        for t in 0..horizon {
            let a = q.greedy_action(t, &s);
            let (r, sp) = env.step(t, &s, a, &mut rng);
            learner.push(t, &s, a, r, &sp)?;
            s = sp;
        }
        let policy = greedy(&q);
        let seed = derive_seed(cfg.seed, &[0x7265_6772, trial, k as u64]);
        inst.push(per_episode_regret(&policy, optimal, env, cfg.rollouts_per_eval, seed)?.mean);
        previous = Some(policy);
    }
    Ok(inst)
}
