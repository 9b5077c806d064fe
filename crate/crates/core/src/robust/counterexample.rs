use crate::error::{Error, Result};
use crate::mdp::SensitivityModel;

use super::bounds::msm_bound_pair;

/// Searches for full propensities `P(A = a | U = u)` consistent with the
/// worst-case weights of every action at once.
///
/// Action 0 is pinned at its upper weight `β(0)`, so
/// `P(A = 0 | u) = P(A = 0)/β(0)`. Every other action takes one of its two
/// extreme weights. Returns the first assignment whose conditionals sum to
/// one, or `None` when no combination is realizable.
pub fn realizable_assignment(p_actions: &[f64], lambda: f64) -> Result<Option<Vec<f64>>> {
    if p_actions.is_empty() || p_actions.len() > 20 {
        return Err(Error::InvalidInput("need between 1 and 20 actions".into()));
    }
    let total: f64 = p_actions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("action marginals sum to {total}, not 1")));
    }
    let model = SensitivityModel::odds_ratio(lambda)?;
    let bounds = p_actions
        .iter()
        .map(|&p| msm_bound_pair(p, &model))
        .collect::<Result<Vec<_>>>()?;
    let k = p_actions.len();
    for mask in 0u32..(1 << (k - 1)) {
        let mut cond = Vec::with_capacity(k);
        cond.push(p_actions[0] / bounds[0].1);
        for a in 1..k {
            let (alpha, beta) = bounds[a];
            let w = if mask >> (a - 1) & 1 == 1 { beta } else { alpha };
            cond.push(p_actions[a] / w);
        }
        if (cond.iter().sum::<f64>() - 1.0).abs() < 1e-12 {
            return Ok(Some(cond));
        }
    }
    Ok(None)
}

/// The three-action, 24-point instance with `P(A) = (4, 8, 12)/24` and
/// `Λ = 3` admits no simultaneously realizable worst case.
pub fn counterexample_check() -> bool {
    matches!(
        realizable_assignment(&[4.0 / 24.0, 8.0 / 24.0, 12.0 / 24.0], 3.0),
        Ok(None)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_action_instance_is_not_realizable() {
        assert!(counterexample_check());
    }

    #[test]
    fn hand_computed_candidate_sums() {
        // P(A=0|u) = 1/16; P(A=1|u) ∈ {3/5, 1/7}; P(A=2|u) ∈ {3/4, 1/4}
        let sums: [f64; 4] = [
            1.0 / 16.0 + 3.0 / 5.0 + 3.0 / 4.0,
            1.0 / 16.0 + 3.0 / 5.0 + 1.0 / 4.0,
            1.0 / 16.0 + 1.0 / 7.0 + 3.0 / 4.0,
            1.0 / 16.0 + 1.0 / 7.0 + 1.0 / 4.0,
        ];
        assert!(sums.iter().all(|s| (s - 1.0).abs() > 0.04));
    }

    #[test]
    fn two_actions_and_nominal_are_realizable() {
        let two = realizable_assignment(&[1.0 / 3.0, 2.0 / 3.0], 3.0).unwrap().unwrap();
        assert!((two[0] - 1.0 / 7.0).abs() < 1e-12 && (two[1] - 6.0 / 7.0).abs() < 1e-12);
        assert!(realizable_assignment(&[4.0 / 24.0, 8.0 / 24.0, 12.0 / 24.0], 1.0)
            .unwrap()
            .is_some());
    }

    proptest! {
        #[test]
        fn two_actions_always_realizable(p in 0.01f64..0.99, l in 1.0f64..30.0) {
            prop_assert!(realizable_assignment(&[p, 1.0 - p], l).unwrap().is_some());
        }
    }
}
