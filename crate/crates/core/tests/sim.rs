mod common;

use common::reward_intercept;
use robustfqi::mdp::{rollout_value, Environment, Policy};
use robustfqi::numerics::{dot, fit_least_squares};
use robustfqi::robust::c_lambda;
use robustfqi::seeding::rng_for;
use robustfqi::sim::{
    ar1_beta, ar1_robust_gap, build_highdim_env, build_lowdim_env, build_warmstart_env, ground_truth,
    ground_truth_grid, sample_confounded, sample_offline, sample_with_policy, Ar1Env, SampleMode,
};

#[test]
fn nominal_ground_truth_matches_an_independent_recursion() {
    let env = build_lowdim_env(0).unwrap();
    let truth = ground_truth(&env, 1.0, 1000, 3).unwrap();
    // V_t(s) = β_tᵀ s + c_t with β_t = θ_μᵀ(θ_R + γ β_{t+1}) and the action
    // shifting the mean by θ_A a 1.
    let d = env.d;
    let mut beta = vec![0.0; d];
    let mut c = 0.0;
    for t in (0..env.horizon).rev() {
        let w: Vec<f64> = (0..d).map(|i| env.theta_r[i] + env.gamma * beta[i]).collect();
        let mut next = vec![0.0; d];
        for (i, wi) in w.iter().enumerate() {
            for (j, n) in next.iter_mut().enumerate() {
                *n += env.theta_mu.get(i, j) * wi;
            }
        }
        let gain = env.theta_a * w.iter().sum::<f64>();
        c = env.gamma * c + gain.max(0.0);
        for (a, b) in next.iter().zip(&truth.slopes[t]) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((truth.intercepts[t][truth.optimal_actions[t]] - c).abs() < 1e-10);
        assert_eq!(truth.optimal_actions[t], usize::from(gain > 0.0));
        beta = next;
    }
}

#[test]
fn robust_value_decreases_in_lambda() {
    let env = build_lowdim_env(0).unwrap();
    let grid = [1.0, 2.0, 5.25, 8.5, 11.75, 15.0];
    let truths = ground_truth_grid(&env, &grid, 5000, 1).unwrap();
    let mut rng = rng_for(5, 0);
    for _ in 0..50 {
        let s = env.initial_state(&mut rng);
        let values: Vec<f64> = truths.iter().map(|g| g.value(0, &s)).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    }
}

#[test]
fn nominal_ground_truth_matches_monte_carlo_rollouts() {
    let env = build_lowdim_env(0).unwrap();
    let truth = ground_truth(&env, 1.0, 1000, 3).unwrap();
    let actions = truth.optimal_actions.clone();
    let policy = Policy::fixed(2, move |t, _s| actions[t]);
    let est = rollout_value(&env, &policy, 40_000, 17).unwrap();
    // E[V_0(S_0)] = c_0 because E[S_0] = 0.
    let target = truth.intercepts[0][truth.optimal_actions[0]];
    assert!(
        (est.mean - target).abs() < 4.0 * est.se,
        "{} ± {} vs {target}",
        est.mean,
        est.se
    );
}

#[test]
fn robust_ground_truth_penalty_is_the_gaussian_shortfall() {
    // For T = 1 the linearized penalty is 0.5·C(Λ)·sd, so the intercept gap
    // between Λ and 1 is −0.5·C(Λ)·E[sd(S_0)] up to the affine fit error.
    let mut env = build_lowdim_env(0).unwrap();
    env.horizon = 1;
    let lambda = 4.0;
    let nominal = ground_truth(&env, 1.0, 20_000, 2).unwrap();
    let robust = ground_truth(&env, lambda, 20_000, 2).unwrap();
    let mut rng = rng_for(7, 0);
    let n = 20_000;
    let mean_sd = (0..n)
        .map(|_| {
            let s = env.initial_state(&mut rng);
            let sd = env.conditional_std(&s);
            env.theta_r
                .iter()
                .zip(&sd)
                .map(|(r, v)| (r * v).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum::<f64>()
        / n as f64;
    let gap = robust.intercepts[0][0] - nominal.intercepts[0][0];
    let expect = -0.5 * c_lambda(lambda).unwrap() * mean_sd;
    assert!((gap - expect).abs() < 0.01 * expect.abs(), "{gap} vs {expect}");
}

#[test]
fn default_environments_satisfy_positivity_and_stability() {
    for env in [build_lowdim_env(0).unwrap(), build_highdim_env(0).unwrap()] {
        assert!(env.validity_problem().is_none());
        assert!(env.positivity_violation_rate(100_000, env.seed + 1).unwrap() <= 1e-4);
    }
}

#[test]
fn offline_data_follows_the_behavior_policy_and_dynamics() {
    let env = build_lowdim_env(0).unwrap();
    let ds = sample_offline(&env, 3000, SampleMode::IidRestart, 4).unwrap();
    let batch = ds.pooled();
    let n = batch.len() as f64;
    let freq = batch.actions.iter().filter(|&&a| a == 1).count() as f64 / n;
    assert!((freq - 0.5).abs() < 3.0 * (0.25 / n).sqrt());
    // Regress one next-state coordinate on [s, a]: slope on a is θ_A.
    let design = robustfqi::numerics::DenseMatrix::from_fn_rows(batch.len(), env.d + 1, |i, r| {
        r[..env.d].copy_from_slice(batch.states.row(i));
        r[env.d] = batch.actions[i] as f64;
    });
    let target = batch.next_states.column(0);
    let fit = fit_least_squares(&design, &target, 0.0, true).unwrap();
    let coef_a = fit.weights[env.d];
    let resid_sd = (target
        .iter()
        .zip(design.row_iter())
        .map(|(y, x)| (y - fit.predict(x)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let se = resid_sd * 2.0 / n.sqrt();
    assert!((coef_a - env.theta_a).abs() < 3.0 * se, "{coef_a} vs {}", env.theta_a);
    for (k, w) in fit.weights[..env.d].iter().enumerate() {
        assert!((w - env.theta_mu.get(0, k)).abs() < 0.2);
    }
}

#[test]
fn confounding_biases_observational_rewards() {
    let env = build_warmstart_env(0).unwrap();
    let obs = sample_confounded(&env, 20_000, 1).unwrap();
    let uniform = sample_with_policy(&env, &Policy::Uniform { num_actions: 4 }, 20_000, 2).unwrap();
    let (b_obs, se_obs) = reward_intercept(&obs, 0);
    let (b_int, se_int) = reward_intercept(&uniform, 0);
    let z = (b_obs - b_int) / (se_obs.powi(2) + se_int.powi(2)).sqrt();
    assert!(z.abs() > 3.0, "z = {z}");
    // The observational confounder mean for action 0 is 2 rather than 3/2.
    let expect = 0.5 * dot(&env.theta_r, &env.theta_mu_u);
    assert!((b_obs - b_int - expect).abs() < 4.0 * (se_obs.powi(2) + se_int.powi(2)).sqrt());
}

#[test]
fn state_only_policies_share_the_marginal_transition() {
    let env = build_warmstart_env(0).unwrap();
    let uniform = sample_with_policy(&env, &Policy::Uniform { num_actions: 4 }, 20_000, 3).unwrap();
    let tilted = Policy::stochastic(4, |_t, s: &[f64]| {
        if s[0] > 0.0 {
            vec![0.4, 0.3, 0.2, 0.1]
        } else {
            vec![0.1, 0.2, 0.3, 0.4]
        }
    });
    let other = sample_with_policy(&env, &tilted, 20_000, 4).unwrap();
    for a in 0..4 {
        let (b1, s1) = reward_intercept(&uniform, a);
        let (b2, s2) = reward_intercept(&other, a);
        assert!(
            (b1 - b2).abs() < 3.0 * (s1 * s1 + s2 * s2).sqrt(),
            "action {a}: {b1} vs {b2}"
        );
    }
}

#[test]
fn analytic_optimal_q_matches_rollouts() {
    let env = build_warmstart_env(0).unwrap();
    let q = env.optimal_q().unwrap();
    let policy = Policy::greedy(q.clone());
    let est = rollout_value(&env, &policy, 40_000, 8).unwrap();
    let target = q.max_value(0, &vec![0.0; env.d]);
    assert!(
        (est.mean - target).abs() < 4.0 * est.se,
        "{} ± {} vs {target}",
        est.mean,
        est.se
    );
}

#[test]
fn ar1_gap_regimes_scale_with_the_horizon() {
    let (theta_r, sigma_p, lambda) = (1.0, 1.0, 5.0);
    let gap = |tp: f64, t: usize| ar1_robust_gap(tp, theta_r, sigma_p, t, lambda).unwrap().gap;
    // θ_P < 1: linear growth, doubling T roughly doubles the gap.
    let r = gap(0.5, 32) / gap(0.5, 16);
    assert!((r - 2.0).abs() < 0.1, "{r}");
    // θ_P = 1: |θ_R + θ_V| grows linearly, so the gap is quadratic.
    let c = c_lambda(lambda).unwrap();
    for t in [2, 4, 8] {
        let exact = 0.5 * c * sigma_p * theta_r * (t * (t + 1)) as f64 / 2.0;
        assert!((gap(1.0, t) - exact).abs() < 1e-12);
    }
    // θ_P > 1: increments grow geometrically with ratio θ_P.
    let inc = |t: usize| gap(1.3, t + 1) - gap(1.3, t);
    assert!((inc(12) / inc(11) - 1.3).abs() < 0.02);
}

#[test]
fn ar1_recursion_matches_simulated_nominal_value() {
    let env = Ar1Env {
        theta_p: 0.9,
        theta_r: 1.0,
        sigma_p: 1.0,
        horizon: 4,
        init_std: 1.0,
    };
    let g = ar1_robust_gap(0.9, 1.0, 1.0, 4, 1.0).unwrap();
    assert!((g.slope - ar1_beta(0.9, 1.0, 4)).abs() < 1e-12);
    // With S_0 = s fixed the nominal value is β_T s.
    let s0 = [1.5];
    let mut rng = rng_for(3, 0);
    let n = 20_000;
    let policy = Policy::Uniform { num_actions: 2 };
    let returns: Vec<f64> = (0..n)
        .map(|_| robustfqi::mdp::rollout_return(&env, &policy, &s0, &mut rng))
        .collect();
    let est = robustfqi::mdp::Estimate::from_samples(&returns);
    assert!((est.mean - g.slope * s0[0]).abs() < 4.0 * est.se);
}
