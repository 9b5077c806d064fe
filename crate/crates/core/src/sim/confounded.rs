use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{Environment, FeatureMap, Policy, QFunction, SimRng, TrajectoryDataset};
use crate::numerics::{dot, norm2, spectral_norm, DenseMatrix, LinearModel};
use crate::seeding::rng_for;

/// Number of confounder values and of actions.
pub const NUM_ACTIONS: usize = 4;

/// Knobs for drawing a [`ConfoundedEnv`]; the effect sizes are imposed
/// exactly on the reward direction `θ_R` (normalized to unit length).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfoundedEnvSpec {
    pub d: usize,
    pub horizon: usize,
    /// Spectral norm of the state transition matrix `θ_{μ,s}`.
    pub transition_norm: f64,
    /// `θ_Rᵀ θ_{μ,a}`: true reward gain per unit of action index.
    pub action_effect: f64,
    /// `θ_Rᵀ θ_{μ,u}`: reward gain per unit of the confounder.
    pub confounder_effect: f64,
    /// Norm of the components of `θ_{μ,a}` and `θ_{μ,u}` orthogonal to `θ_R`.
    pub off_axis: f64,
    /// Entry scale of `θ_{σ,s}` (entries are `N(0, 1)·scale/√d`).
    pub sigma_state_scale: f64,
    /// Entry scale of `θ_{σ,a}`.
    pub sigma_action_scale: f64,
    /// Baseline transition noise.
    pub noise_base: f64,
    /// Extra reward noise when `U = 3` and `A = 0`.
    pub sigma_r: f64,
    pub init_std: f64,
}

impl Default for ConfoundedEnvSpec {
    fn default() -> Self {
        Self {
            d: 8,
            horizon: 4,
            transition_norm: 0.5,
            action_effect: 0.1,
            confounder_effect: 0.6,
            off_axis: 0.1,
            sigma_state_scale: 0.05,
            sigma_action_scale: 0.01,
            noise_base: 0.2,
            sigma_r: 0.5,
            init_std: 0.1f64.sqrt(),
        }
    }
}

/// Linear-Gaussian MDP with a memoryless confounder `U ~ Uniform{0,…,3}`:
/// `S' ~ N(θ_{μ,s}s + θ_{μ,a}a + θ_{μ,u}u, diag(max(θ_{σ,s}s + θ_{σ,a}a + c, 0))²)`,
/// `R ~ N(θ_Rᵀ S', (1e-8 + 1{u = 3}1{a = 0}σ_R)²)`.
///
/// The [`Environment`] impl is the online (interventional) process, where `U`
/// is drawn but never seen by the policy. Offline data from
/// [`sample_confounded`] uses the behavior rule `π^b(a | u) = 1/2` if
/// `a = 3 − u` and `1/6` otherwise, whose marginal is uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfoundedEnv {
    pub d: usize,
    pub horizon: usize,
    pub theta_mu_s: DenseMatrix,
    pub theta_mu_a: Vec<f64>,
    pub theta_mu_u: Vec<f64>,
    pub theta_sigma_s: DenseMatrix,
    pub theta_sigma_a: Vec<f64>,
    pub noise_base: f64,
    pub theta_r: Vec<f64>,
    pub sigma_r: f64,
    pub init_std: f64,
    pub seed: u64,
}

fn normal_vec(n: usize, scale: f64, rng: &mut SimRng) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `effect·r + off_axis·(unit vector orthogonal to r)`, for unit `r`.
fn with_projection(r: &[f64], effect: f64, off_axis: f64, rng: &mut SimRng) -> Vec<f64> {
    let mut z = normal_vec(r.len(), 1.0, rng);
    let proj = dot(&z, r);
    z.iter_mut().zip(r).for_each(|(zi, ri)| *zi -= proj * ri);
    let nz = norm2(&z).max(f64::MIN_POSITIVE);
    r.iter()
        .zip(&z)
        .map(|(ri, zi)| effect * ri + off_axis * zi / nz)
        .collect()
}

/// Draws the warm-start environment from `spec`.
pub fn build_confounded_env(spec: &ConfoundedEnvSpec, seed: u64) -> Result<ConfoundedEnv> {
    if spec.d == 0 || spec.horizon == 0 {
        return Err(Error::InvalidInput("confounded env needs d ≥ 1 and T ≥ 1".into()));
    }
    let d = spec.d;
    let mut rng = rng_for(seed, 0x636f_6e66);
    let mut theta_r = normal_vec(d, 1.0, &mut rng);
    let nr = norm2(&theta_r);
    theta_r.iter_mut().for_each(|v| *v /= nr);
    let raw = DenseMatrix::new(d, d, normal_vec(d * d, 1.0, &mut rng))?;
    let scale = spec.transition_norm / spectral_norm(&raw);
    let theta_mu_s = DenseMatrix::new(d, d, raw.as_slice().iter().map(|v| v * scale).collect())?;
    let theta_mu_a = with_projection(&theta_r, spec.action_effect, spec.off_axis, &mut rng);
    let theta_mu_u = with_projection(&theta_r, spec.confounder_effect, spec.off_axis, &mut rng);
    let sd_scale = spec.sigma_state_scale / (d as f64).sqrt();
    let theta_sigma_s = DenseMatrix::new(d, d, normal_vec(d * d, sd_scale, &mut rng))?;
    let theta_sigma_a = normal_vec(d, spec.sigma_action_scale / (d as f64).sqrt(), &mut rng);
    Ok(ConfoundedEnv {
        d,
        horizon: spec.horizon,
        theta_mu_s,
        theta_mu_a,
        theta_mu_u,
        theta_sigma_s,
        theta_sigma_a,
        noise_base: spec.noise_base,
        theta_r,
        sigma_r: spec.sigma_r,
        init_std: spec.init_std,
        seed,
    })
}

/// The warm-start environment with default knobs.
pub fn build_warmstart_env(seed: u64) -> Result<ConfoundedEnv> {
    build_confounded_env(&ConfoundedEnvSpec::default(), seed)
}

/// Behavior probability `π^b(a | u)`.
pub fn behavior_prob(a: usize, u: usize) -> f64 {
    if a + u == NUM_ACTIONS - 1 {
        0.5
    } else {
        1.0 / 6.0
    }
}

impl ConfoundedEnv {
    pub fn mean_next_state(&self, s: &[f64], a: usize, u: f64) -> Vec<f64> {
        (0..self.d)
            .map(|i| dot(self.theta_mu_s.row(i), s) + self.theta_mu_a[i] * a as f64 + self.theta_mu_u[i] * u)
            .collect()
    }

    pub fn conditional_std(&self, s: &[f64], a: usize) -> Vec<f64> {
        (0..self.d)
            .map(|i| (dot(self.theta_sigma_s.row(i), s) + self.theta_sigma_a[i] * a as f64 + self.noise_base).max(0.0))
            .collect()
    }

    /// One transition with a given confounder; consumes exactly `d + 1` normals.
    pub fn step_with_u(&self, s: &[f64], a: usize, u: usize, rng: &mut SimRng) -> (f64, Vec<f64>) {
        let mean = self.mean_next_state(s, a, u as f64);
        let sd = self.conditional_std(s, a);
        let sp: Vec<f64> = mean
            .iter()
            .zip(&sd)
            .map(|(m, v)| m + v * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let extra = if u == 3 && a == 0 { self.sigma_r } else { 0.0 };
        let r = dot(&self.theta_r, &sp) + (1e-8 + extra) * rng.sample::<f64, _>(StandardNormal);
        (r, sp)
    }

    /// Exact optimal Q-function when `U` enters the dynamics through `E[U | a] = u_mean(a)`.
    fn linear_q(&self, u_mean: impl Fn(usize) -> f64) -> Result<QFunction> {
        let mut models = vec![Vec::new(); self.horizon];
        let mut v_next = vec![0.0; self.d];
        let mut c_next = 0.0;
        for t in (0..self.horizon).rev() {
            let w: Vec<f64> = self.theta_r.iter().zip(&v_next).map(|(r, v)| r + v).collect();
            let slope = self.theta_mu_s.t_matvec(&w)?;
            let cs: Vec<f64> = (0..NUM_ACTIONS)
                .map(|a| a as f64 * dot(&w, &self.theta_mu_a) + u_mean(a) * dot(&w, &self.theta_mu_u) + c_next)
                .collect();
            c_next = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            models[t] = cs.iter().map(|&c| LinearModel::new(slope.clone(), c)).collect();
            v_next = slope;
        }
        QFunction::new(FeatureMap::RawStatePerAction, models, self.d)
    }

    /// Exact optimal Q-function of the online process (`E[U] = 3/2`). The mean
    /// dynamics are affine and the optimal action is state-independent, so
    /// `Q*` is affine in the state.
    pub fn optimal_q(&self) -> Result<QFunction> {
        self.linear_q(|_| 1.5)
    }

    /// The Q-function a learner would infer by treating confounded offline
    /// transitions as interventional (`E[U | A = a] = 2 − a/3`).
    pub fn observational_q(&self) -> Result<QFunction> {
        self.linear_q(|a| 2.0 - a as f64 / 3.0)
    }

    /// Reward magnitude used for value truncation: the `level` quantile of
    /// `|R|` over online rollouts of a uniform policy.
    pub fn reward_envelope(&self, level: f64, episodes: usize, seed: u64) -> f64 {
        let mut rng = rng_for(seed, 0x656e_766c);
        let mut rs = Vec::with_capacity(episodes * self.horizon);
        for _ in 0..episodes {
            let mut s = self.initial_state(&mut rng);
            for t in 0..self.horizon {
                let a = rng.random_range(0..NUM_ACTIONS);
                let (r, sp) = self.step(t, &s, a, &mut rng);
                rs.push(r.abs());
                s = sp;
            }
        }
        crate::robust::empirical_quantile(&rs, level)
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

impl Environment for ConfoundedEnv {
    fn state_dim(&self) -> usize {
        self.d
    }

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64> {
        normal_vec(self.d, self.init_std, rng)
    }

    fn step(&self, _t: usize, s: &[f64], a: usize, rng: &mut SimRng) -> (f64, Vec<f64>) {
        let u = rng.random_range(0..NUM_ACTIONS);
        self.step_with_u(s, a, u, rng)
    }
}

/// Offline trajectories under the confounded behavior rule. `U` is drawn,
/// used for the action and the transition, and discarded.
pub fn sample_confounded(env: &ConfoundedEnv, n_episodes: usize, seed: u64) -> Result<TrajectoryDataset> {
    sample_with(env, n_episodes, seed, |u, rng| {
        let probs: Vec<f64> = (0..NUM_ACTIONS).map(|a| behavior_prob(a, u)).collect();
        crate::mdp::sample_categorical(&probs, rng)
    })
}

/// Offline trajectories under a state-only policy (no confounding).
pub fn sample_with_policy(
    env: &ConfoundedEnv,
    policy: &Policy,
    n_episodes: usize,
    seed: u64,
) -> Result<TrajectoryDataset> {
    if policy.num_actions() != NUM_ACTIONS {
        return Err(Error::Dimension {
            context: "sample_with_policy: policy actions",
            expected: NUM_ACTIONS,
            actual: policy.num_actions(),
        });
    }
    let mut ds = TrajectoryDataset::with_capacity(n_episodes, env.horizon, env.d, NUM_ACTIONS);
    let mut rng = rng_for(seed, 0x706f_6c69);
    for _ in 0..n_episodes {
        let mut s = env.initial_state(&mut rng);
        let mut states = s.clone();
        let mut actions = Vec::with_capacity(env.horizon);
        let mut rewards = Vec::with_capacity(env.horizon);
        for t in 0..env.horizon {
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

fn sample_with(
    env: &ConfoundedEnv,
    n_episodes: usize,
    seed: u64,
    choose: impl Fn(usize, &mut SimRng) -> usize,
) -> Result<TrajectoryDataset> {
    let mut ds = TrajectoryDataset::with_capacity(n_episodes, env.horizon, env.d, NUM_ACTIONS);
    let mut rng = rng_for(seed, 0x636f_6e64);
    for _ in 0..n_episodes {
        let mut s = env.initial_state(&mut rng);
        let mut states = s.clone();
        let mut actions = Vec::with_capacity(env.horizon);
        let mut rewards = Vec::with_capacity(env.horizon);
        for _ in 0..env.horizon {
            let u = rng.random_range(0..NUM_ACTIONS);
            let a = choose(u, &mut rng);
            let (r, sp) = env.step_with_u(&s, a, u, &mut rng);
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
    fn behavior_marginal_is_uniform() {
        for a in 0..NUM_ACTIONS {
            let marginal: f64 = (0..NUM_ACTIONS).map(|u| behavior_prob(a, u) / 4.0).sum();
            assert!((marginal - 0.25).abs() < 1e-15);
        }
        // the odds ratio of 1/2 against the 1/4 marginal is exactly 3
        let odds = |p: f64| p / (1.0 - p);
        assert!((odds(0.5) / odds(0.25) - 3.0).abs() < 1e-12);
        assert!((odds(0.25) / odds(1.0 / 6.0) - 1.666_666_666_666_666_7).abs() < 1e-12);
    }

    #[test]
    fn construction_imposes_effect_sizes() {
        let spec = ConfoundedEnvSpec::default();
        let env = build_confounded_env(&spec, 5).unwrap();
        assert!((dot(&env.theta_r, &env.theta_mu_a) - spec.action_effect).abs() < 1e-12);
        assert!((dot(&env.theta_r, &env.theta_mu_u) - spec.confounder_effect).abs() < 1e-12);
        assert!((spectral_norm(&env.theta_mu_s) - spec.transition_norm).abs() < 1e-9);
        assert_eq!(env, build_confounded_env(&spec, 5).unwrap());
    }
}
