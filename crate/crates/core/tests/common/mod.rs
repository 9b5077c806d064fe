#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use robustfqi::mdp::{QFunction, TrajectoryDataset};
use robustfqi::seeding::rng_for;

/// Small linear-Gaussian dataset with two actions, a behavior coin with
/// `P(A = 1) = p1`, and rewards `1ᵀs' + noise`.
pub fn random_dataset(n: usize, d: usize, horizon: usize, p1: f64, seed: u64) -> TrajectoryDataset {
    let mut rng = rng_for(seed, 0x7465_7374);
    let mut ds = TrajectoryDataset::with_capacity(n, horizon, d, 2);
    for _ in 0..n {
        let mut s: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let mut states = s.clone();
        let mut actions = Vec::new();
        let mut rewards = Vec::new();
        for _ in 0..horizon {
            let a = usize::from(rng.random_bool(p1));
            let sp: Vec<f64> = (0..d)
                .map(|i| {
                    let z: f64 = rng.sample(StandardNormal);
                    0.5 * s[i] + 0.3 * a as f64 + (0.5 + 0.1 * s[(i + 1) % d].abs()) * z
                })
                .collect();
            let eps: f64 = rng.sample(StandardNormal);
            rewards.push(sp.iter().sum::<f64>() + 0.2 * eps);
            actions.push(a);
            states.extend_from_slice(&sp);
            s = sp;
        }
        ds.push_trajectory(&states, &actions, &rewards).unwrap();
    }
    ds
}

/// Largest absolute difference between corresponding parameters.
pub fn max_param_diff(a: &QFunction, b: &QFunction) -> f64 {
    assert_eq!(a.horizon(), b.horizon());
    assert_eq!(a.num_actions(), b.num_actions());
    let mut worst = 0.0f64;
    for t in 0..a.horizon() {
        for k in 0..a.num_actions() {
            let (ma, mb) = (a.model(t, k).stacked(), b.model(t, k).stacked());
            for (x, y) in ma.iter().zip(&mb) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    worst
}

/// OLS of the reward on `[s, 1]` over the pooled rows with action `a`;
/// returns the intercept and its heteroskedasticity-robust (HC0) standard error.
pub fn reward_intercept(ds: &TrajectoryDataset, a: usize) -> (f64, f64) {
    response_intercept(ds, a, |_, r, _| r)
}

/// As [`reward_intercept`] for an arbitrary response `f(s, r, s')`.
pub fn response_intercept(ds: &TrajectoryDataset, a: usize, f: impl Fn(&[f64], f64, &[f64]) -> f64) -> (f64, f64) {
    use robustfqi::numerics::{dot, spd_inverse};
    let batch = ds.pooled();
    let idx = batch.rows_with_action(a);
    let x = batch.states.select_rows(&idx).with_ones_column();
    let y: Vec<f64> = idx
        .iter()
        .map(|&i| f(batch.states.row(i), batch.rewards[i], batch.next_states.row(i)))
        .collect();
    let inv = spd_inverse(&x.gram()).expect("full-rank design");
    let beta = inv.matvec(&x.t_matvec(&y).unwrap()).unwrap();
    let p = x.cols();
    let mut meat = robustfqi::numerics::DenseMatrix::zeros(p, p);
    for (row, yi) in x.row_iter().zip(&y) {
        let e2 = (yi - dot(row, &beta)).powi(2);
        for i in 0..p {
            for j in 0..p {
                meat.set(i, j, meat.get(i, j) + e2 * row[i] * row[j]);
            }
        }
    }
    let cov = inv.matmul(&meat).unwrap().matmul(&inv).unwrap();
    (beta[p - 1], cov.get(p - 1, p - 1).sqrt())
}
