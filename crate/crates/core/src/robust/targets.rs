use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::mdp::{Policy, QFunction, TransitionBatch};

/// Orientation of the robust bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Worst case: expected shortfall below the `(1 − τ)` quantile.
    #[default]
    Lower,
    /// Best case: expected excess above the `τ` quantile.
    Upper,
}

impl Bound {
    /// Conditional quantile level the targets are built around.
    pub fn quantile_level(&self, tau: f64) -> f64 {
        match self {
            Bound::Lower => 1.0 - tau,
            Bound::Upper => tau,
        }
    }

    #[inline]
    fn in_tail(&self, y: f64, z: f64) -> bool {
        match self {
            Bound::Lower => y <= z,
            Bound::Upper => y >= z,
        }
    }
}

/// How the continuation value at `S'` is aggregated over actions.
#[derive(Debug, Clone, Copy)]
pub enum NominalMode<'a> {
    Max,
    Policy(&'a Policy),
}

/// `Y = R + γ·V(S')` where `V` is `max_a Q_{t_next}(S', a)` or the policy
/// expectation of `Q_{t_next}(S', ·)`.
pub fn nominal_targets(
    q_next: &QFunction,
    t_next: usize,
    batch: &TransitionBatch,
    gamma: f64,
    mode: NominalMode,
) -> Vec<f64> {
    batch
        .next_states
        .row_iter()
        .zip(&batch.rewards)
        .map(|(sp, r)| {
            let cont = match mode {
                _ if t_next >= q_next.horizon() => 0.0,
                NominalMode::Max => q_next.max_value(t_next, sp),
                NominalMode::Policy(pi) => q_next.expected_value(t_next, sp, &pi.probabilities(t_next, sp)),
            };
            r + gamma * cont
        })
        .collect()
}

/// Closed-form robust pseudo-outcome `αY + ((1−α)/(1−τ))·Y·1{tail}`.
pub fn plugin_targets(y: &[f64], z_hat: &[f64], alpha: &[f64], tau: f64, bound: Bound) -> Result<Vec<f64>> {
    check_dim("plugin_targets: z_hat", y.len(), z_hat.len())?;
    check_dim("plugin_targets: alpha", y.len(), alpha.len())?;
    Ok(y.iter()
        .zip(z_hat)
        .zip(alpha)
        .map(|((&yi, &zi), &a)| {
            let tail = if bound.in_tail(yi, zi) { yi } else { 0.0 };
            a * yi + (1.0 - a) / (1.0 - tau) * tail
        })
        .collect())
}

/// Orthogonalized pseudo-outcome
/// `αY + ((1−α)/(1−τ))·(Y·1{tail} − Z·(1{tail} − (1−τ)))`.
///
/// The correction has conditional mean zero at the true quantile, which
/// removes the first-order sensitivity to quantile estimation error.
pub fn orthogonal_targets(y: &[f64], z_hat: &[f64], alpha: &[f64], tau: f64, bound: Bound) -> Result<Vec<f64>> {
    check_dim("orthogonal_targets: z_hat", y.len(), z_hat.len())?;
    check_dim("orthogonal_targets: alpha", y.len(), alpha.len())?;
    Ok(y.iter()
        .zip(z_hat)
        .zip(alpha)
        .map(|((&yi, &zi), &a)| {
            let ind = if bound.in_tail(yi, zi) { 1.0 } else { 0.0 };
            a * yi + (1.0 - a) / (1.0 - tau) * (yi * ind - zi * (ind - (1.0 - tau)))
        })
        .collect())
}

/// Lowest order statistic whose empirical CDF is at least `level`.
pub fn empirical_quantile(y: &[f64], level: f64) -> f64 {
    let mut v = y.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mut k = ((level * n as f64).ceil() as usize).clamp(1, n);
    while k > 1 && (k - 1) as f64 / n as f64 >= level {
        k -= 1;
    }
    while k < n && (k as f64) / (n as f64) < level {
        k += 1;
    }
    v[k - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::FeatureMap;
    use crate::numerics::{DenseMatrix, LinearModel};
    use crate::seeding::rng_for;
    use rand_distr::{Distribution, Exp, Normal};

    fn batch() -> TransitionBatch {
        TransitionBatch {
            states: DenseMatrix::zeros(3, 1),
            actions: vec![0, 1, 0],
            rewards: vec![1.0, 2.0, -1.0],
            next_states: DenseMatrix::from_rows(&[vec![1.0], vec![-2.0], vec![0.5]]).unwrap(),
        }
    }

    fn linear_q() -> QFunction {
        // t = 0 unused; t = 1: Q(s,0) = s, Q(s,1) = 1 − s
        let m = vec![
            vec![LinearModel::zeros(1), LinearModel::zeros(1)],
            vec![LinearModel::new(vec![1.0], 0.0), LinearModel::new(vec![-1.0], 1.0)],
        ];
        QFunction::new(FeatureMap::RawStatePerAction, m, 1).unwrap()
    }

    #[test]
    fn hand_dataset_targets() {
        let q = linear_q();
        let y = nominal_targets(&q, 1, &batch(), 0.5, NominalMode::Max);
        // max(s', 1−s'): 1, 3, 0.5
        assert_eq!(y, vec![1.5, 3.5, -0.75]);
        let half = Policy::Uniform { num_actions: 2 };
        let yp = nominal_targets(&q, 1, &batch(), 1.0, NominalMode::Policy(&half));
        assert_eq!(yp, vec![1.5, 2.5, -0.5]);
        let terminal = nominal_targets(&q, 2, &batch(), 0.9, NominalMode::Max);
        assert_eq!(terminal, batch().rewards);
    }

    #[test]
    fn single_action_modes_agree() {
        let m = vec![
            vec![LinearModel::new(vec![2.0], 1.0)],
            vec![LinearModel::new(vec![2.0], 1.0)],
        ];
        let q = QFunction::new(FeatureMap::RawStatePerAction, m, 1).unwrap();
        let pi = Policy::Uniform { num_actions: 1 };
        assert_eq!(
            nominal_targets(&q, 1, &batch(), 0.9, NominalMode::Max),
            nominal_targets(&q, 1, &batch(), 0.9, NominalMode::Policy(&pi))
        );
    }

    #[test]
    fn alpha_one_is_identity() {
        let y = [1.0, -2.0, 3.5];
        let z = [0.0, 0.0, 10.0];
        for b in [Bound::Lower, Bound::Upper] {
            assert_eq!(plugin_targets(&y, &z, &[1.0; 3], 0.5, b).unwrap(), y.to_vec());
            assert_eq!(orthogonal_targets(&y, &z, &[1.0; 3], 0.5, b).unwrap(), y.to_vec());
        }
    }

    #[test]
    fn hand_formulas_below_quantile() {
        let y = [1.0, 2.0, -3.0];
        let z = [5.0; 3];
        let tau = 2.0 / 3.0;
        let alpha = [0.75; 3];
        let p = plugin_targets(&y, &z, &alpha, tau, Bound::Lower).unwrap();
        for (pi, yi) in p.iter().zip(&y) {
            assert!((pi - 1.5 * yi).abs() < 1e-12);
        }
        let o = orthogonal_targets(&y, &z, &alpha, tau, Bound::Lower).unwrap();
        for (oi, yi) in o.iter().zip(&y) {
            let want = 0.75 * yi + (0.25 / (1.0 - tau)) * (yi - 5.0 * tau);
            assert!((oi - want).abs() < 1e-12);
        }
    }

    #[test]
    fn correction_has_zero_mean_at_true_quantile() {
        // Y ~ Exp(1): the (1−τ) quantile is −ln τ
        let mut rng = rng_for(17, 0);
        let tau = 0.75;
        let z = -f64::ln(tau);
        let n = 400_000;
        let exp = Exp::new(1.0).unwrap();
        let y: Vec<f64> = (0..n).map(|_| exp.sample(&mut rng)).collect();
        let zs = vec![z; n];
        let alpha = vec![0.6; n];
        let p = plugin_targets(&y, &zs, &alpha, tau, Bound::Lower).unwrap();
        let o = orthogonal_targets(&y, &zs, &alpha, tau, Bound::Lower).unwrap();
        let diff: Vec<f64> = o.iter().zip(&p).map(|(a, b)| a - b).collect();
        let e = crate::mdp::Estimate::from_samples(&diff);
        assert!(e.mean.abs() < 3.0 * e.se, "mean {} se {}", e.mean, e.se);
        // the plug-in mean is the lower-tail expectation αμ + (1−α)·E[Y | Y ≤ z]
        let cvar = (1.0 - tau * (1.0 + z)) / (1.0 - tau);
        let want = 0.6 + 0.4 * cvar;
        let ep = crate::mdp::Estimate::from_samples(&p);
        assert!((ep.mean - want).abs() < 3.0 * ep.se);
    }

    #[test]
    fn upper_is_negated_lower_of_negated_outcome() {
        let mut rng = rng_for(5, 0);
        let nd = Normal::new(0.0, 2.0).unwrap();
        let y: Vec<f64> = (0..50).map(|_| nd.sample(&mut rng)).collect();
        let z: Vec<f64> = (0..50).map(|_| nd.sample(&mut rng)).collect();
        let alpha: Vec<f64> = (0..50).map(|i| 0.4 + 0.01 * i as f64).collect();
        let ny: Vec<f64> = y.iter().map(|v| -v).collect();
        let nz: Vec<f64> = z.iter().map(|v| -v).collect();
        for f in [plugin_targets, orthogonal_targets] {
            let up = f(&y, &z, &alpha, 0.8, Bound::Upper).unwrap();
            let lo = f(&ny, &nz, &alpha, 0.8, Bound::Lower).unwrap();
            for (u, l) in up.iter().zip(&lo) {
                assert!((u + l).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empirical_quantile_convention() {
        let y = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(empirical_quantile(&y, 0.25), 1.0);
        assert_eq!(empirical_quantile(&y, 0.26), 2.0);
        assert_eq!(empirical_quantile(&y, 1.0), 4.0);
        assert_eq!(empirical_quantile(&[7.0, 1.0, 5.0], 1.0 / 3.0), 1.0);
    }
}
