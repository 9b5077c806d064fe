use crate::error::{check_dim, Result};
use crate::mdp::{Environment, QFunction};
use crate::seeding::rng_for;
use crate::sim::GroundTruth;

/// `m` independent draws from the initial-state distribution.
pub fn draw_holdout(env: &dyn Environment, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_for(seed, 0x686f_6c64);
    (0..m).map(|_| env.initial_state(&mut rng)).collect()
}

/// Mean of `(max_a Q̂_0(s, a) − V̄*_0(s))²` over the holdout states.
pub fn metric_mse_v0(q: &QFunction, truth: &GroundTruth, holdout: &[Vec<f64>]) -> f64 {
    if holdout.is_empty() {
        return 0.0;
    }
    holdout
        .iter()
        .map(|s| (q.max_value(0, s) - truth.value(0, s)).powi(2))
        .sum::<f64>()
        / holdout.len() as f64
}

/// Percentage of holdout states where the greedy action of `Q̂_0` differs
/// from the oracle action.
pub fn metric_pct_wrong(q: &QFunction, truth: &GroundTruth, holdout: &[Vec<f64>]) -> f64 {
    if holdout.is_empty() {
        return 0.0;
    }
    let best = truth.optimal_actions[0];
    let wrong = holdout.iter().filter(|s| q.greedy_action(0, s) != best).count();
    100.0 * wrong as f64 / holdout.len() as f64
}

/// ℓ₂ norm of the stacked difference of all `t = 0` parameters
/// `[w_a, b_a]` against the oracle's `[v_0, c_{0,a}]`.
pub fn metric_param_err(q: &QFunction, truth: &GroundTruth) -> Result<f64> {
    check_dim("metric_param_err: actions", truth.intercepts[0].len(), q.num_actions())?;
    check_dim(
        "metric_param_err: state dimension",
        truth.slopes[0].len(),
        q.state_dim(),
    )?;
    let mut sq = 0.0;
    for (a, &c) in truth.intercepts[0].iter().enumerate() {
        let m = q.model(0, a);
        sq += m
            .weights
            .iter()
            .zip(&truth.slopes[0])
            .map(|(w, v)| (w - v).powi(2))
            .sum::<f64>();
        sq += (m.intercept - c).powi(2);
    }
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::FeatureMap;
    use crate::numerics::LinearModel;

    fn toy_truth() -> GroundTruth {
        GroundTruth {
            lambda: 1.0,
            m: 1,
            slopes: vec![vec![1.0, -2.0]],
            intercepts: vec![vec![0.5, 0.2]],
            optimal_actions: vec![0],
        }
    }

    fn holdout() -> Vec<Vec<f64>> {
        (0..50)
            .map(|i| vec![i as f64 / 10.0 - 2.5, (i % 7) as f64 / 3.0])
            .collect()
    }

    #[test]
    fn oracle_fit_scores_zero() {
        let truth = toy_truth();
        let q = truth.to_qfunction().unwrap();
        assert_eq!(metric_mse_v0(&q, &truth, &holdout()), 0.0);
        assert_eq!(metric_pct_wrong(&q, &truth, &holdout()), 0.0);
        assert_eq!(metric_param_err(&q, &truth).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_gives_its_square() {
        let truth = toy_truth();
        let c = 0.3;
        let models = vec![truth.intercepts[0]
            .iter()
            .map(|&b| LinearModel::new(truth.slopes[0].clone(), b + c))
            .collect()];
        let q = QFunction::new(FeatureMap::RawStatePerAction, models, 2).unwrap();
        assert!((metric_mse_v0(&q, &truth, &holdout()) - c * c).abs() < 1e-12);
        assert!((metric_param_err(&q, &truth).unwrap() - c * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn flipped_action_effect_is_always_wrong() {
        let truth = toy_truth();
        let models = vec![vec![
            LinearModel::new(truth.slopes[0].clone(), 0.2),
            LinearModel::new(truth.slopes[0].clone(), 0.5),
        ]];
        let q = QFunction::new(FeatureMap::RawStatePerAction, models, 2).unwrap();
        assert_eq!(metric_pct_wrong(&q, &truth, &holdout()), 100.0);
    }
}
