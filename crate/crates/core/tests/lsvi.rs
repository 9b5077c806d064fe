use std::sync::Arc;

use rand::Rng;
use robustfqi::fqi::BehaviorPolicy;
use robustfqi::lsvi::{
    estimate_optimal_value, lsvi_ucb_against, per_episode_regret, robust_upper, value_caps, Learner, OnlineConfig,
    WarmStart,
};
use robustfqi::mdp::{rollout_value, Environment, Policy, SimRng, TrajectoryDataset};
use robustfqi::seeding::rng_for;
use robustfqi::sim::{build_warmstart_env, sample_confounded, sample_with_policy, ConfoundedEnv};

fn online_learner(env: &ConfoundedEnv, episodes: usize, seed: u64) -> Learner {
    let ds = sample_with_policy(env, &Policy::Uniform { num_actions: 4 }, episodes, seed).unwrap();
    let mut learner = Learner::new(env.d, 4, env.horizon, 0.07, 1e-6);
    learner.push_dataset(&ds).unwrap();
    learner
}

fn small_config(env: &ConfoundedEnv, warmstart: WarmStart) -> OnlineConfig {
    OnlineConfig {
        episodes: 6,
        horizon: env.horizon,
        trials: 3,
        rollouts_per_eval: 50,
        seed: 11,
        warmstart,
        ..OnlineConfig::default()
    }
}

#[test]
fn truncated_q_respects_the_cap_and_the_point_estimate() {
    let env = build_warmstart_env(0).unwrap();
    let offline = sample_confounded(&env, 2000, 1).unwrap();
    let upper = robust_upper(&offline, 3.0, &BehaviorPolicy::Known(vec![0.25; 4]), None).unwrap();
    assert!(upper.is_some());
    let cfg = OnlineConfig::default();
    let cap = value_caps(&env, &cfg);
    let mut rng = rng_for(3, 0);
    for episodes in [0, 1, 5, 40] {
        let learner = online_learner(&env, episodes, 2);
        let robust = learner.plan(upper.clone(), &cap).unwrap();
        let standard = learner.plan(None, &cap).unwrap();
        let last = env.horizon - 1;
        for _ in 0..200 {
            let s: Vec<f64> = (0..env.d).map(|_| rng.random_range(-1.0..1.0)).collect();
            for (t, &c) in cap.iter().enumerate() {
                for a in 0..4 {
                    let q = robust.value(t, &s, a);
                    let (est, _) = robust.estimate_and_bonus(t, &s, a);
                    assert!(q <= c + 1e-12);
                    assert!(q >= est.min(c) - 1e-12, "Q {q} below point estimate {est}");
                }
            }
            // Both fits share the step-T−1 regression, so the truncation can only lower it.
            for a in 0..4 {
                assert!(robust.value(last, &s, a) <= standard.value(last, &s, a) + 1e-12);
            }
        }
    }
}

#[test]
fn robust_branch_lowers_optimism_on_visited_states() {
    let env = build_warmstart_env(0).unwrap();
    let offline = sample_confounded(&env, 2000, 1).unwrap();
    let upper = robust_upper(&offline, 3.0, &BehaviorPolicy::Known(vec![0.25; 4]), None).unwrap();
    let cap = value_caps(&env, &OnlineConfig::default());
    let learner = online_learner(&env, 20, 4);
    let robust = learner.plan(upper, &cap).unwrap();
    let standard = learner.plan(None, &cap).unwrap();
    let probes = sample_with_policy(&env, &Policy::Uniform { num_actions: 4 }, 200, 5).unwrap();
    let (mut lower, mut total) = (0, 0);
    for i in 0..probes.len() {
        for t in 0..env.horizon {
            let s = probes.state(i, t);
            lower += usize::from(robust.max_value(t, s) <= standard.max_value(t, s) + 1e-9);
            total += 1;
        }
    }
    assert_eq!(
        lower,
        total,
        "robust optimistic value exceeded the standard one on {} probes",
        total - lower
    );
}

#[test]
fn empty_offline_data_reduces_to_standard_lsvi() {
    let env = build_warmstart_env(0).unwrap();
    let optimal = Policy::greedy(env.optimal_q().unwrap());
    let empty = Arc::new(TrajectoryDataset::with_capacity(0, env.horizon, env.d, 4));
    let standard = lsvi_ucb_against(&env, &small_config(&env, WarmStart::None), &optimal).unwrap();
    let robust = WarmStart::Robust {
        lambda: 3.0,
        offline: empty.clone(),
        behavior: BehaviorPolicy::Known(vec![0.25; 4]),
        per_episode: false,
    };
    let warm = lsvi_ucb_against(&env, &small_config(&env, robust), &optimal).unwrap();
    assert_eq!(standard, warm);
    let naive = lsvi_ucb_against(&env, &small_config(&env, WarmStart::Naive { offline: empty }), &optimal).unwrap();
    assert_eq!(standard, naive);
}

#[test]
fn runs_are_deterministic_and_shaped() {
    let env = build_warmstart_env(0).unwrap();
    let optimal = Policy::greedy(env.optimal_q().unwrap());
    let cfg = small_config(&env, WarmStart::None);
    let a = lsvi_ucb_against(&env, &cfg, &optimal).unwrap();
    let b = lsvi_ucb_against(&env, &cfg, &optimal).unwrap();
    assert_eq!(a, b);
    assert_eq!((a.trials(), a.episodes()), (3, 6));
    for i in 0..a.trials() {
        assert!(a.cumulative(i).windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn first_episode_plays_the_lowest_action_everywhere() {
    // With no data every action has the same capped value, so the greedy
    // tie-break picks action 0 and the first regret is that of "always 0".
    let env = build_warmstart_env(0).unwrap();
    let optimal = Policy::greedy(env.optimal_q().unwrap());
    let cfg = OnlineConfig {
        episodes: 1,
        trials: 20,
        rollouts_per_eval: 500,
        ..OnlineConfig::default()
    };
    let trace = lsvi_ucb_against(&env, &cfg, &optimal).unwrap();
    let first = trace.final_cumulative();
    let always_zero = Policy::fixed(4, |_, _| 0);
    let direct = per_episode_regret(&always_zero, &optimal, &env, 20_000, 9).unwrap();
    assert!(direct.mean > 0.5);
    let se = (first.se.powi(2) + direct.se.powi(2)).sqrt();
    assert!((first.mean - direct.mean).abs() < 4.0 * se, "{first:?} vs {direct:?}");
}

#[test]
fn regret_is_zero_against_itself_and_positive_for_uniform() {
    let env = build_warmstart_env(0).unwrap();
    let optimal = Policy::greedy(env.optimal_q().unwrap());
    let same = per_episode_regret(&optimal, &optimal, &env, 500, 1).unwrap();
    assert_eq!(same.mean, 0.0);
    let uniform = Policy::Uniform { num_actions: 4 };
    let r = per_episode_regret(&uniform, &optimal, &env, 2000, 2).unwrap();
    assert!(r.mean > 5.0 * r.se, "{r:?}");
}

#[test]
fn optimal_value_estimate_matches_the_analytic_oracle() {
    let env = build_warmstart_env(0).unwrap();
    let est = estimate_optimal_value(&env, 100_000, 4).unwrap();
    let exact = env.optimal_q().unwrap();
    // The analytic Q* is affine in s and E[S_0] = 0.
    let target = exact.max_value(0, &vec![0.0; env.d]);
    assert!((est.fitted - target).abs() < 0.03, "{} vs {target}", est.fitted);
    assert!((est.rollout.mean - target).abs() < 4.0 * est.rollout.se);
    let mut rng = rng_for(6, 0);
    for _ in 0..100 {
        let s = env.initial_state(&mut rng);
        for t in 0..env.horizon {
            assert_eq!(est.q.greedy_action(t, &s), exact.greedy_action(t, &s));
        }
    }
}

#[test]
fn doubling_the_budget_is_stable() {
    let env = build_warmstart_env(0).unwrap();
    let small = estimate_optimal_value(&env, 50_000, 7).unwrap();
    let large = estimate_optimal_value(&env, 100_000, 7).unwrap();
    assert!(
        (small.fitted - large.fitted).abs() < large.rollout.se,
        "{} vs {}",
        small.fitted,
        large.fitted
    );
}

#[test]
fn optimal_policy_beats_random_policies() {
    let env = build_warmstart_env(0).unwrap();
    let est = estimate_optimal_value(&env, 50_000, 8).unwrap();
    let best = rollout_value(&env, &est.policy(), 4000, 10).unwrap();
    let mut rng = rng_for(12, 0);
    for k in 0..100 {
        let w: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..=env.d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let policy = Policy::fixed(4, move |_, s| {
            let score = |a: usize| w[a][env.d] + w[a].iter().zip(s).map(|(x, y)| x * y).sum::<f64>();
            (0..4).max_by(|&a, &b| score(a).total_cmp(&score(b))).unwrap()
        });
        let v = rollout_value(&env, &policy, 1000, 100 + k).unwrap();
        assert!(
            v.mean <= best.mean + 3.0 * (v.se.powi(2) + best.se.powi(2)).sqrt(),
            "{v:?} vs {best:?}"
        );
    }
}

/// Two states encoded one-hot, deterministic transitions and rewards.
struct Tabular;

const NEXT: [[usize; 2]; 2] = [[0, 1], [1, 0]];
const REWARD: [[f64; 2]; 2] = [[0.2, 0.5], [1.0, -0.3]];

impl Environment for Tabular {
    fn state_dim(&self) -> usize {
        2
    }
    fn num_actions(&self) -> usize {
        2
    }
    fn horizon(&self) -> usize {
        3
    }
    fn gamma(&self) -> f64 {
        1.0
    }
    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64> {
        one_hot(rng.random_range(0..2))
    }
    fn step(&self, _t: usize, s: &[f64], a: usize, _rng: &mut SimRng) -> (f64, Vec<f64>) {
        let i = usize::from(s[1] > 0.5);
        (REWARD[i][a], one_hot(NEXT[i][a]))
    }
}

fn one_hot(i: usize) -> Vec<f64> {
    let mut v = vec![0.0; 2];
    v[i] = 1.0;
    v
}

#[test]
fn optimal_value_estimate_matches_tabular_value_iteration() {
    let est = estimate_optimal_value(&Tabular, 4000, 1).unwrap();
    let mut v = [0.0; 2];
    for t in (0..3).rev() {
        let mut next = [0.0; 2];
        for i in 0..2 {
            for a in 0..2 {
                let q = REWARD[i][a] + v[NEXT[i][a]];
                assert!((est.q.value(t, &one_hot(i), a) - q).abs() < 1e-3, "t={t} s={i} a={a}");
                next[i] = f64::max(if a == 0 { f64::NEG_INFINITY } else { next[i] }, q);
            }
        }
        v = next;
    }
    assert!((est.fitted - (v[0] + v[1]) / 2.0).abs() < 0.05);
}
