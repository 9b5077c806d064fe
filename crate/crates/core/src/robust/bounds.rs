use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{SensitivityModel, SetKind};

/// Per-sample weight bounds `α ≤ w ≤ β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsmBounds {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// `(α, β)` for one behavior probability.
pub fn msm_bound_pair(pb: f64, model: &SensitivityModel) -> Result<(f64, f64)> {
    model.validate()?;
    if !(pb > 0.0 && pb <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "behavior probability must lie in (0, 1], got {pb}"
        )));
    }
    let l = model.lambda;
    Ok(match model.set_kind {
        SetKind::OddsRatio => (pb + (1.0 - pb) / l, pb + l * (1.0 - pb)),
        SetKind::DensityRatio => (1.0 / l, l),
    })
}

/// Elementwise MSM bounds for a vector of behavior probabilities.
pub fn msm_bounds(pb: &[f64], model: &SensitivityModel) -> Result<MsmBounds> {
    let mut alpha = Vec::with_capacity(pb.len());
    let mut beta = Vec::with_capacity(pb.len());
    for &p in pb {
        let (a, b) = msm_bound_pair(p, model)?;
        alpha.push(a);
        beta.push(b);
    }
    Ok(MsmBounds { alpha, beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_values() {
        let m = SensitivityModel::odds_ratio(2.0).unwrap();
        assert_eq!(msm_bound_pair(0.5, &m).unwrap(), (0.75, 1.5));
        let dr = SensitivityModel::new(2.0, SetKind::DensityRatio).unwrap();
        assert_eq!(msm_bound_pair(0.3, &dr).unwrap(), (0.5, 2.0));
        let nominal = SensitivityModel::odds_ratio(1.0).unwrap();
        assert_eq!(msm_bound_pair(0.37, &nominal).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn invalid_inputs() {
        let m = SensitivityModel::odds_ratio(2.0).unwrap();
        assert!(msm_bound_pair(0.0, &m).is_err());
        assert!(msm_bound_pair(1.1, &m).is_err());
        let bad = SensitivityModel {
            lambda: 0.5,
            set_kind: SetKind::OddsRatio,
        };
        assert!(msm_bounds(&[0.5], &bad).is_err());
    }

    #[test]
    fn density_ratio_is_small_propensity_limit() {
        for l in [1.5, 3.0, 15.0] {
            let or = msm_bound_pair(1e-9, &SensitivityModel::odds_ratio(l).unwrap()).unwrap();
            let dr = msm_bound_pair(1e-9, &SensitivityModel::new(l, SetKind::DensityRatio).unwrap()).unwrap();
            assert!((or.0 - dr.0).abs() < 1e-6 && (or.1 - dr.1).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn ordering_invariant(pb in 1e-6f64..=1.0, l in 1.0f64..50.0) {
            let (a, b) = msm_bound_pair(pb, &SensitivityModel::odds_ratio(l).unwrap()).unwrap();
            prop_assert!(a > 0.0 && a <= 1.0 + 1e-15 && b >= 1.0 - 1e-15);
            if l > 1.0 && pb < 1.0 {
                prop_assert!(a < b);
            }
        }
    }
}
