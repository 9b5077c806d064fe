use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{Environment, SimRng, TrajectoryDataset};
use crate::numerics::{dot, spectral_radius, DenseMatrix};
use crate::seeding::rng_for;

/// Number of states drawn when checking the positivity of the conditional std.
pub const POSITIVITY_SAMPLES: usize = 100_000;
/// Largest tolerated fraction of sampled states with a clipped conditional std.
pub const POSITIVITY_TOLERANCE: f64 = 1e-4;
const MAX_REGENERATIONS: u64 = 1000;

/// Heteroskedastic linear-Gaussian MDP with two actions:
/// `S' ~ N(θ_μ s + θ_A a·1, diag(max(θ_σ s + σ, 0))²)`, `R = θ_Rᵀ S'`,
/// `S_0 ~ N(0, init_std²·I)`, and a behavior policy with `π^b(1 | s)` constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGaussianEnv {
    pub d: usize,
    pub theta_mu: DenseMatrix,
    pub theta_sigma: DenseMatrix,
    pub theta_a: f64,
    pub sigma: f64,
    pub theta_r: Vec<f64>,
    pub gamma: f64,
    pub horizon: usize,
    pub init_std: f64,
    /// Behavior probability of action 1.
    pub behavior_p1: f64,
    /// Seed that produced the parameters after any regeneration.
    pub seed: u64,
}

/// How an offline dataset of `n` transitions is laid out in trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// One long behavior rollout cut into consecutive blocks of `T` steps.
    #[default]
    Chunked,
    /// Independent episodes, each restarted from the initial distribution.
    IidRestart,
}

/// Magnitude profile, mask rate, and scale for one generated parameter set.
struct Profile {
    d: usize,
    mu_scale: f64,
    sigma_scale: f64,
    reward_scale: f64,
    sigma: f64,
    /// Smallest accepted `|1ᵀθ_R|` in units of its standard deviation.
    min_action_signal: f64,
}

const LOWDIM: Profile = Profile {
    d: 25,
    mu_scale: 2.2,
    sigma_scale: 0.48,
    reward_scale: 3.0,
    sigma: 0.36,
    min_action_signal: 2.0,
};

const HIGHDIM: Profile = Profile {
    d: 100,
    mu_scale: 2.2 / 1.2,
    sigma_scale: 0.48 / 20.0,
    reward_scale: 2.0,
    sigma: 0.1,
    min_action_signal: 0.5,
};

/// Column-masked `scale·mask_j/(j + k + offset)` with `mask_j ~ Bernoulli(rate)`.
fn masked_profile(d: usize, scale: f64, rate: f64, offset: f64, rng: &mut SimRng) -> DenseMatrix {
    let mask: Vec<f64> = (0..d).map(|_| if rng.random_bool(rate) { 1.0 } else { 0.0 }).collect();
    DenseMatrix::from_fn_rows(d, d, |k, row| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = scale * mask[j] / (j as f64 + k as f64 + offset);
        }
    })
}

fn draw(profile: &Profile, seed: u64) -> LinearGaussianEnv {
    let d = profile.d;
    let mut rng = rng_for(seed, 0x6c67_656e);
    let theta_mu = masked_profile(d, profile.mu_scale, 0.3, 1.0, &mut rng);
    let theta_sigma = masked_profile(d, profile.sigma_scale, 0.6, 10.0, &mut rng);
    let theta_r = (0..d)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            let keep = rng.random_bool(0.3);
            if keep {
                profile.reward_scale * z
            } else {
                0.0
            }
        })
        .collect();
    LinearGaussianEnv {
        d,
        theta_mu,
        theta_sigma,
        theta_a: -0.05,
        sigma: profile.sigma,
        theta_r,
        gamma: 0.9,
        horizon: 4,
        init_std: 0.1,
        behavior_p1: 0.5,
        seed,
    }
}

fn build(profile: &Profile, seed: u64) -> Result<LinearGaussianEnv> {
    for attempt in 0..MAX_REGENERATIONS {
        let env = draw(profile, seed.wrapping_add(attempt));
        match env.validity_problem().or_else(|| weak_action_effect(profile, &env)) {
            None => return Ok(env),
            Some(why) => log::info!("environment seed {} rejected ({why}); regenerating", env.seed),
        }
    }
    Err(Error::Domain(format!(
        "no valid environment within {MAX_REGENERATIONS} seeds starting at {seed}"
    )))
}

/// The action shifts every coordinate by `θ_A`, so the optimal action is
/// identifiable only when `1ᵀθ_R` is away from zero. Rejects draws with
/// `|1ᵀθ_R|` below `min_action_signal` standard deviations `scale·(0.3 d)^{1/2}`.
fn weak_action_effect(profile: &Profile, env: &LinearGaussianEnv) -> Option<String> {
    let sum: f64 = env.theta_r.iter().sum();
    let sd = profile.reward_scale * (0.3 * profile.d as f64).sqrt();
    let min = profile.min_action_signal * sd;
    (sum.abs() < min).then(|| format!("|1ᵀθ_R| = {:.3} is below {min:.3}", sum.abs()))
}

/// The 25-dimensional offline environment.
pub fn build_lowdim_env(seed: u64) -> Result<LinearGaussianEnv> {
    build(&LOWDIM, seed)
}

/// The low-dimensional parameter recipe at another dimension `d`.
pub fn build_lowdim_env_with_dim(d: usize, seed: u64) -> Result<LinearGaussianEnv> {
    if d == 0 {
        return Err(Error::InvalidInput("state dimension must be positive".into()));
    }
    build(&Profile { d, ..LOWDIM }, seed)
}

/// The 100-dimensional offline environment.
pub fn build_highdim_env(seed: u64) -> Result<LinearGaussianEnv> {
    build(&HIGHDIM, seed)
}

impl LinearGaussianEnv {
    /// Elementwise conditional standard deviation `max(θ_σ s + σ, 0)`.
    pub fn conditional_std(&self, s: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|i| (dot(self.theta_sigma.row(i), s) + self.sigma).max(0.0))
            .collect()
    }

    /// Conditional mean `θ_μ s + θ_A a·1`.
    pub fn conditional_mean(&self, s: &[f64], a: usize) -> Vec<f64> {
        (0..self.d)
            .map(|i| dot(self.theta_mu.row(i), s) + self.theta_a * a as f64)
            .collect()
    }

    /// Fraction of behavior-visited states whose raw conditional std
    /// `θ_σ s + σ` has a non-positive coordinate.
    pub fn positivity_violation_rate(&self, n_states: usize, seed: u64) -> Result<f64> {
        let ds = sample_offline(self, n_states.div_ceil(self.horizon), SampleMode::Chunked, seed)?;
        let mut bad = 0usize;
        let mut total = 0usize;
        for i in 0..ds.len() {
            for t in 0..ds.horizon() {
                let s = ds.state(i, t);
                total += 1;
                if (0..self.d).any(|k| dot(self.theta_sigma.row(k), s) + self.sigma <= 0.0) {
                    bad += 1;
                }
            }
        }
        Ok(bad as f64 / total as f64)
    }

    /// Why the parameters are unusable, if they are: a non-stable mean map
    /// (the offline data is one long rollout), no reward signal, or a
    /// conditional std that is clipped on too many visited states.
    pub fn validity_problem(&self) -> Option<String> {
        let rho = spectral_radius(&self.theta_mu);
        if rho >= 1.0 {
            return Some(format!("spectral radius {rho:.3} ≥ 1"));
        }
        if self.theta_r.iter().all(|&v| v == 0.0) {
            return Some("reward vector is zero".into());
        }
        match self.positivity_violation_rate(POSITIVITY_SAMPLES, self.seed) {
            Ok(rate) if rate > POSITIVITY_TOLERANCE => Some(format!("std clipped on {rate:.2e} of states")),
            Ok(_) => None,
            Err(e) => Some(e.to_string()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

impl Environment for LinearGaussianEnv {
    fn state_dim(&self) -> usize {
        self.d
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64> {
        (0..self.d)
            .map(|_| self.init_std * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    fn step(&self, _t: usize, s: &[f64], a: usize, rng: &mut SimRng) -> (f64, Vec<f64>) {
        let sd = self.conditional_std(s);
        let sp: Vec<f64> = self
            .conditional_mean(s, a)
            .into_iter()
            .zip(sd)
            .map(|(m, v)| m + v * rng.sample::<f64, _>(StandardNormal))
            .collect();
        (dot(&self.theta_r, &sp), sp)
    }
}

/// Offline behavior data with `n_episodes` trajectories of length `T`, so
/// `n_episodes` samples per timestep.
pub fn sample_offline(
    env: &LinearGaussianEnv,
    n_episodes: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<TrajectoryDataset> {
    if n_episodes == 0 {
        return Err(Error::InvalidInput("need at least one episode".into()));
    }
    let (d, horizon) = (env.d, env.horizon);
    let episodes = n_episodes;
    let mut rng = rng_for(seed, 0x6f66_666c);
    let mut ds = TrajectoryDataset::with_capacity(episodes, horizon, d, 2);
    let mut s = env.initial_state(&mut rng);
    let mut states = Vec::with_capacity((horizon + 1) * d);
    let mut actions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    for _ in 0..episodes {
        if mode == SampleMode::IidRestart {
            s = env.initial_state(&mut rng);
        }
        states.clear();
        actions.clear();
        rewards.clear();
        states.extend_from_slice(&s);
        for t in 0..horizon {
            let a = usize::from(rng.random_bool(env.behavior_p1));
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_are_seed_deterministic() {
        let a = build_lowdim_env(3).unwrap();
        let b = build_lowdim_env(3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.d, 25);
        assert!(a.validity_problem().is_none());
    }

    #[test]
    fn mask_rates_match_bernoulli_within_three_se() {
        // Pool many independent draws so the binomial test has power.
        let (mut mu_cols, mut sig_cols, mut total) = (0usize, 0usize, 0usize);
        for seed in 0..40 {
            let env = draw(&LOWDIM, seed);
            for j in 0..env.d {
                mu_cols += usize::from(env.theta_mu.get(0, j) != 0.0);
                sig_cols += usize::from(env.theta_sigma.get(0, j) != 0.0);
            }
            total += env.d;
        }
        for (count, p) in [(mu_cols, 0.3), (sig_cols, 0.6)] {
            let rate = count as f64 / total as f64;
            let se = (p * (1.0 - p) / total as f64).sqrt();
            assert!((rate - p).abs() < 3.0 * se, "rate {rate} vs {p}");
        }
    }

    #[test]
    fn json_roundtrip() {
        let env = build_lowdim_env(1).unwrap();
        let back: LinearGaussianEnv = serde_json::from_str(&env.to_json().unwrap()).unwrap();
        assert_eq!(back, env);
    }

    #[test]
    fn chunked_dataset_has_requested_episodes_and_chains() {
        let env = build_lowdim_env(0).unwrap();
        let ds = sample_offline(&env, 6, SampleMode::Chunked, 4).unwrap();
        assert_eq!(ds.len(), 6);
        // consecutive chunks continue the same rollout
        assert_eq!(ds.state(1, 0), ds.state(0, env.horizon));
        let iid = sample_offline(&env, 8, SampleMode::IidRestart, 4).unwrap();
        assert_ne!(iid.state(1, 0), iid.state(0, env.horizon));
    }
}
