use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fqi::{nominal_fqi, FqiConfig};
use crate::mdp::{rollout_return, rollout_value, sample_episodes, Environment, Estimate, Policy, QFunction};
use crate::seeding::{derive_seed, rng_for};

/// Instantaneous regret per trial and episode.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RegretTrace {
    /// `inst[trial][k]`: Monte-Carlo estimate of `V*_0 − V^{π^k}_0`.
    pub inst: Vec<Vec<f64>>,
}

impl RegretTrace {
    pub fn trials(&self) -> usize {
        self.inst.len()
    }

    pub fn episodes(&self) -> usize {
        self.inst.first().map_or(0, Vec::len)
    }

    /// Cumulative regret of one trial with negative estimates clipped to 0.
    pub fn cumulative(&self, trial: usize) -> Vec<f64> {
        let mut acc = 0.0;
        self.inst[trial]
            .iter()
            .map(|&r| {
                acc += r.max(0.0);
                acc
            })
            .collect()
    }

    /// Number of negative instantaneous estimates that were clipped.
    pub fn clipped(&self) -> usize {
        self.inst.iter().flatten().filter(|&&r| r < 0.0).count()
    }

    /// Mean and standard error across trials of the cumulative regret after each episode.
    pub fn summary(&self) -> Vec<Estimate> {
        let cums: Vec<Vec<f64>> = (0..self.trials()).map(|i| self.cumulative(i)).collect();
        (0..self.episodes())
            .map(|k| Estimate::from_samples(&cums.iter().map(|c| c[k]).collect::<Vec<_>>()))
            .collect()
    }

    /// Cumulative regret after the last episode, across trials.
    pub fn final_cumulative(&self) -> Estimate {
        self.summary().last().copied().unwrap_or(Estimate {
            mean: 0.0,
            se: 0.0,
            n: 0,
        })
    }

    /// Rows `(trial, episode, inst_regret, cum_regret)`, episodes counted from 1.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["trial", "episode", "inst_regret", "cum_regret"])?;
        for (i, inst) in self.inst.iter().enumerate() {
            for (k, (r, c)) in inst.iter().zip(self.cumulative(i)).enumerate() {
                w.write_record([i.to_string(), (k + 1).to_string(), r.to_string(), c.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Rows `(episode, mean_cum_regret, se_cum_regret)`.
    pub fn write_summary_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["episode", "mean_cum_regret", "se_cum_regret"])?;
        for (k, e) in self.summary().iter().enumerate() {
            w.write_record([(k + 1).to_string(), e.mean.to_string(), e.se.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Regret of `policy` against `optimal` from the initial distribution,
/// estimated with common random numbers: both policies start from the same
/// draw of `S_0` and consume the same random stream.
pub fn per_episode_regret(
    policy: &Policy,
    optimal: &Policy,
    env: &dyn Environment,
    rollouts: usize,
    seed: u64,
) -> Result<Estimate> {
    if rollouts == 0 {
        return Err(Error::InvalidInput("need at least one rollout".into()));
    }
    let diffs: Vec<f64> = (0..rollouts as u64)
        .map(|i| {
            let mut rng = rng_for(derive_seed(seed, &[i]), 0x7265_6772);
            let s0 = env.initial_state(&mut rng);
            let mut twin = rng.clone();
            rollout_return(env, optimal, &s0, &mut rng) - rollout_return(env, policy, &s0, &mut twin)
        })
        .collect();
    Ok(Estimate::from_samples(&diffs))
}

/// Optimal Q-function estimate and its Monte-Carlo cross-check.
#[derive(Debug, Clone)]
pub struct OptimalValue {
    pub q: QFunction,
    /// Mean of `max_a Q̂_0(S_0, a)` over fresh initial states.
    pub fitted: f64,
    /// Rollout value of the greedy policy of `q`.
    pub rollout: Estimate,
}

impl OptimalValue {
    pub fn policy(&self) -> Policy {
        Policy::greedy(self.q.clone())
    }
}

/// Nominal FQI on `budget_n` episodes of a uniform state-only policy. Without
/// confounding in the online process this targets the optimal Q-function.
pub fn estimate_optimal_value(env: &dyn Environment, budget_n: usize, seed: u64) -> Result<OptimalValue> {
    if budget_n == 0 {
        return Err(Error::InvalidInput("budget must be at least one episode".into()));
    }
    let uniform = Policy::Uniform {
        num_actions: env.num_actions(),
    };
    let ds = sample_episodes(env, &uniform, budget_n, derive_seed(seed, &[1]))?;
    let cfg = FqiConfig {
        gamma: env.gamma(),
        ..FqiConfig::default()
    };
    let fit = nominal_fqi(&ds, &cfg)?;
    let n_check = 10_000;
    let mut rng = rng_for(derive_seed(seed, &[2]), 0x6f70_7476);
    let fitted = (0..n_check)
        .map(|_| fit.q.max_value(0, &env.initial_state(&mut rng)))
        .sum::<f64>()
        / n_check as f64;
    let rollout = rollout_value(env, &fit.policy, n_check, derive_seed(seed, &[3]))?;
    if (fitted - rollout.mean).abs() > 4.0 * rollout.se {
        log::warn!(
            "optimal value fit {fitted:.4} disagrees with its rollout value {:.4} ± {:.4}",
            rollout.mean,
            rollout.se
        );
    }
    Ok(OptimalValue {
        q: fit.q,
        fitted,
        rollout,
    })
}
