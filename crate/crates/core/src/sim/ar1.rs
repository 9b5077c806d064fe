use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{Environment, SimRng, TrajectoryDataset};
use crate::robust::c_lambda;
use crate::seeding::rng_for;

/// Scalar AR(1) process `S' ~ N(θ_P S, σ_P²)` with reward `R = θ_R S'`;
/// actions have no effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ar1Env {
    pub theta_p: f64,
    pub theta_r: f64,
    pub sigma_p: f64,
    pub horizon: usize,
    pub init_std: f64,
}

impl Environment for Ar1Env {
    fn state_dim(&self) -> usize {
        1
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64> {
        vec![self.init_std * rng.sample::<f64, _>(StandardNormal)]
    }

    fn step(&self, _t: usize, s: &[f64], _a: usize, rng: &mut SimRng) -> (f64, Vec<f64>) {
        let sp = self.theta_p * s[0] + self.sigma_p * rng.sample::<f64, _>(StandardNormal);
        (self.theta_r * sp, vec![sp])
    }
}

impl Ar1Env {
    /// Behavior data with a state-independent coin-flip behavior policy.
    pub fn sample(&self, n_episodes: usize, seed: u64) -> Result<TrajectoryDataset> {
        let mut rng = rng_for(seed, 0x6172_3173);
        let mut ds = TrajectoryDataset::with_capacity(n_episodes, self.horizon, 1, 2);
        for _ in 0..n_episodes {
            let mut s = self.initial_state(&mut rng);
            let mut states = s.clone();
            let mut actions = Vec::with_capacity(self.horizon);
            let mut rewards = Vec::with_capacity(self.horizon);
            for t in 0..self.horizon {
                let a = usize::from(rng.random_bool(0.5));
                let (r, sp) = self.step(t, &s, a, &mut rng);
                states.extend_from_slice(&sp);
                actions.push(a);
                rewards.push(r);
                s = sp;
            }
            ds.push_trajectory(&states, &actions, &rewards)?;
        }
        Ok(ds)
    }
}

/// Exact population gap between nominal and robust policy values on the
/// AR(1) process, next to the closed-form log-Λ bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Gap {
    /// `V_0(s) − V̄_0(s)`; it does not depend on `s`.
    pub gap: f64,
    /// `(16 θ_P)⁻¹ (Σ_{i=0}^{T−1} β_i) σ_P log Λ` with `β_0 = 0`.
    pub bound: f64,
    /// Nominal and robust value slopes at `t = 0` (they coincide).
    pub slope: f64,
    /// Robust value intercept at `t = 0` (`−gap`).
    pub robust_intercept: f64,
}

/// `β_i = θ_R Σ_{k=1}^{i} θ_P^k`.
pub fn ar1_beta(theta_p: f64, theta_r: f64, i: usize) -> f64 {
    theta_r * (1..=i).map(|k| theta_p.powi(k as i32)).sum::<f64>()
}

/// Rolls the exact robust recursion for a state-independent behavior policy
/// with `π^b = 0.5`: with `V̄_{t+1}(s) = θ_V s + α_V`, the target
/// `(θ_R + θ_V) S' + α_V` is Gaussian with standard deviation
/// `|θ_R + θ_V| σ_P`, so `V̄_t(s) = (θ_R + θ_V) θ_P s + α_V − 0.5 C(Λ) |θ_R + θ_V| σ_P`.
pub fn ar1_robust_gap(theta_p: f64, theta_r: f64, sigma_p: f64, horizon: usize, lambda: f64) -> Result<Ar1Gap> {
    if !(theta_p > 0.0) {
        return Err(Error::InvalidInput(format!("θ_P must be positive, got {theta_p}")));
    }
    if !(sigma_p >= 0.0) {
        return Err(Error::InvalidInput(format!("σ_P must be nonnegative, got {sigma_p}")));
    }
    let c = c_lambda(lambda)?;
    let (mut slope, mut intercept) = (0.0, 0.0);
    for _ in 0..horizon {
        let w = theta_r + slope;
        intercept -= 0.5 * c * w.abs() * sigma_p;
        slope = w * theta_p;
    }
    let beta_sum = (0..horizon)
        .map(|i| ar1_beta(theta_p, theta_r, i))
        .fold(0.0, |a, b| a + b);
    let bound = beta_sum * sigma_p * lambda.ln() / (16.0 * theta_p);
    Ok(Ar1Gap {
        gap: -intercept,
        bound,
        slope,
        robust_intercept: intercept,
    })
}
