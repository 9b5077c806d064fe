use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Solution of `min_w mean(w·y)` subject to `mean(w) = 1`, `α ≤ w ≤ β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub value: f64,
    pub weights: Vec<f64>,
}

/// Exact solution by sorting: the smallest outcomes receive `β` until the
/// unit-mean budget binds, one boundary weight is fractional, and every
/// other weight is `α`. Ties in `y` keep input order.
pub fn lp_oracle(y: &[f64], alpha: f64, beta: f64) -> Result<LpSolution> {
    if y.is_empty() {
        return Err(Error::InvalidInput("lp_oracle needs at least one outcome".into()));
    }
    if !(alpha <= 1.0 && beta >= 1.0 && alpha >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "infeasible weight bounds [{alpha}, {beta}]"
        )));
    }
    let n = y.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| y[i].total_cmp(&y[j]));
    let mut weights = vec![alpha; n];
    let mut budget = n as f64 * (1.0 - alpha);
    let step = beta - alpha;
    for &i in &order {
        if budget <= 0.0 || step <= 0.0 {
            break;
        }
        let add = step.min(budget);
        weights[i] += add;
        budget -= add;
    }
    let value = weights.iter().zip(y).map(|(w, v)| w * v).sum::<f64>() / n as f64;
    Ok(LpSolution { value, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::SensitivityModel;
    use crate::robust::bounds::msm_bound_pair;
    use proptest::prelude::*;

    /// Vertex enumeration oracle for tiny LPs: at an optimum, at most one
    /// weight is strictly between its bounds.
    fn brute_force(y: &[f64], alpha: f64, beta: f64) -> f64 {
        let n = y.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            for free in 0..n {
                let mut w: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { beta } else { alpha }).collect();
                let others: f64 = (0..n).filter(|&i| i != free).map(|i| w[i]).sum();
                let wf = n as f64 - others;
                if wf < alpha - 1e-12 || wf > beta + 1e-12 {
                    continue;
                }
                w[free] = wf;
                let v = w.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / n as f64;
                best = best.min(v);
            }
        }
        best
    }

    #[test]
    fn degenerate_bounds_give_mean() {
        let s = lp_oracle(&[1.0, 2.0, 6.0], 1.0, 1.0).unwrap();
        assert!((s.value - 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_sample_vertex() {
        let s = lp_oracle(&[0.0, 10.0], 0.5, 1.5).unwrap();
        assert_eq!(s.weights, vec![1.5, 0.5]);
        assert!((s.value - 2.5).abs() < 1e-15);
    }

    #[test]
    fn infeasible_bounds_rejected() {
        assert!(lp_oracle(&[1.0], 1.2, 2.0).is_err());
        assert!(lp_oracle(&[1.0], 0.5, 0.9).is_err());
        assert!(lp_oracle(&[], 0.5, 1.5).is_err());
    }

    #[test]
    fn mass_at_beta_is_one_minus_tau() {
        for &(pb, l) in &[(0.5, 2.0), (0.2, 5.0), (0.9, 15.0)] {
            let m = SensitivityModel::odds_ratio(l).unwrap();
            let (a, b) = msm_bound_pair(pb, &m).unwrap();
            let q = (1.0 - a) / (b - a);
            assert!((q - (1.0 - m.tau())).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration(
            y in proptest::collection::vec(-10.0f64..10.0, 1..8),
            pb in 0.05f64..0.95,
            l in 1.0f64..10.0,
        ) {
            let (a, b) = msm_bound_pair(pb, &SensitivityModel::odds_ratio(l).unwrap()).unwrap();
            let s = lp_oracle(&y, a, b).unwrap();
            prop_assert!((s.value - brute_force(&y, a, b)).abs() < 1e-9);
            let mean_w = s.weights.iter().sum::<f64>() / y.len() as f64;
            prop_assert!((mean_w - 1.0).abs() < 1e-12);
            prop_assert!(s.weights.iter().all(|&w| w >= a - 1e-15 && w <= b + 1e-15));
        }

        #[test]
        fn value_below_mean_and_monotone_in_lambda(
            y in proptest::collection::vec(-10.0f64..10.0, 2..50),
            pb in 0.05f64..0.95,
            l in 1.0f64..10.0,
        ) {
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            let m1 = SensitivityModel::odds_ratio(l).unwrap();
            let m2 = SensitivityModel::odds_ratio(l * 1.5).unwrap();
            let (a1, b1) = msm_bound_pair(pb, &m1).unwrap();
            let (a2, b2) = msm_bound_pair(pb, &m2).unwrap();
            let v1 = lp_oracle(&y, a1, b1).unwrap().value;
            let v2 = lp_oracle(&y, a2, b2).unwrap().value;
            prop_assert!(v1 <= mean + 1e-12);
            prop_assert!(v2 <= v1 + 1e-12);
            let constant = y.iter().all(|v| *v == y[0]);
            if !constant {
                prop_assert!(v2 < mean);
            }
        }
    }
}
