use serde::{Deserialize, Serialize};

use super::dataset::TrajectoryDataset;
use super::policy::Policy;
use crate::error::{Error, Result};
use crate::seeding::rng_for;

pub type SimRng = rand_chacha::ChaCha8Rng;

/// Finite-horizon simulator with true (unconfounded) dynamics.
pub trait Environment: Send + Sync {
    fn state_dim(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn horizon(&self) -> usize;
    /// Discount applied to rewards in returns.
    fn gamma(&self) -> f64;
    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64>;
    /// Draws `(reward, next_state)` for taking `a` in `s` at step `t`.
    fn step(&self, t: usize, s: &[f64], a: usize, rng: &mut SimRng) -> (f64, Vec<f64>);
}

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n.max(1) as f64;
        let se = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, se, n }
    }
}

/// Discounted return `Σ_t γ^t R_t` of one episode started at `s0`.
pub fn rollout_return(env: &dyn Environment, policy: &Policy, s0: &[f64], rng: &mut SimRng) -> f64 {
    let gamma = env.gamma();
    let mut s = s0.to_vec();
    let mut total = 0.0;
    let mut disc = 1.0;
    for t in 0..env.horizon() {
        let a = policy.sample(t, &s, rng);
        let (r, sp) = env.step(t, &s, a, rng);
        total += disc * r;
        disc *= gamma;
        s = sp;
    }
    total
}

/// Monte-Carlo estimate of the policy value from the initial distribution.
pub fn rollout_value(env: &dyn Environment, policy: &Policy, n_rollouts: usize, seed: u64) -> Result<Estimate> {
    if n_rollouts == 0 {
        return Err(Error::InvalidInput("n_rollouts must be at least 1".into()));
    }
    let mut rng = rng_for(seed, 0x726f_6c6c);
    let returns: Vec<f64> = (0..n_rollouts)
        .map(|_| {
            let s0 = env.initial_state(&mut rng);
            rollout_return(env, policy, &s0, &mut rng)
        })
        .collect();
    Ok(Estimate::from_samples(&returns))
}

/// `n_episodes` independent episodes of `policy` from the initial distribution.
pub fn sample_episodes(
    env: &dyn Environment,
    policy: &Policy,
    n_episodes: usize,
    seed: u64,
) -> Result<TrajectoryDataset> {
    if policy.num_actions() != env.num_actions() {
        return Err(Error::Dimension {
            context: "sample_episodes: policy actions",
            expected: env.num_actions(),
            actual: policy.num_actions(),
        });
    }
    let (horizon, d) = (env.horizon(), env.state_dim());
    let mut ds = TrajectoryDataset::with_capacity(n_episodes, horizon, d, env.num_actions());
    let mut rng = rng_for(seed, 0x6570_6973);
    let mut states = Vec::with_capacity((horizon + 1) * d);
    let mut actions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    for _ in 0..n_episodes {
        let mut s = env.initial_state(&mut rng);
        states.clear();
        actions.clear();
        rewards.clear();
        states.extend_from_slice(&s);
        for t in 0..horizon {
            let a = policy.sample(t, &s, &mut rng);
            let (r, sp) = env.step(t, &s, a, &mut rng);
            states.extend_from_slice(&sp);
            actions.push(a);
            rewards.push(r);
            s = sp;
        }
        ds.push_trajectory(&states, &actions, &rewards)?;
    }
    Ok(ds)
}
