use serde::{Deserialize, Serialize};

use super::matrix::{dot, DenseMatrix};
use crate::error::{Error, Result};

/// Affine predictor `wᵀx + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, intercept: f64) -> Self {
        Self { weights, intercept }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            intercept: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }

    pub fn predict_all(&self, x: &DenseMatrix) -> Vec<f64> {
        x.row_iter().map(|r| self.predict(r)).collect()
    }

    /// Parameter-wise mean of models sharing a dimension.
    pub fn average(models: &[LinearModel]) -> Result<LinearModel> {
        let first = models
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot average zero models".into()))?;
        let k = models.len() as f64;
        let mut out = LinearModel::zeros(first.dim());
        for m in models {
            crate::error::check_dim("LinearModel::average", first.dim(), m.dim())?;
            for (o, w) in out.weights.iter_mut().zip(&m.weights) {
                *o += w / k;
            }
            out.intercept += m.intercept / k;
        }
        Ok(out)
    }

    /// Parameters stacked as `[weights..., intercept]`.
    pub fn stacked(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.push(self.intercept);
        v
    }
}

/// Solver settings shared by the penalized fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// L1 weight for Lasso and quantile fits, L2 weight for the logistic fit.
    pub penalty: f64,
    pub max_iters: usize,
    pub tol: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_true")]
    pub fit_intercept: bool,
}

fn default_true() -> bool {
    true
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            penalty: 0.0,
            max_iters: 100_000,
            tol: 1e-8,
            seed: None,
            fit_intercept: true,
        }
    }
}

impl FitConfig {
    pub fn with_penalty(penalty: f64) -> Self {
        Self {
            penalty,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.penalty >= 0.0) || !self.penalty.is_finite() {
            return Err(Error::InvalidInput(format!(
                "penalty must be a finite nonnegative number, got {}",
                self.penalty
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// A fitted model plus solver diagnostics. Non-convergence is reported, not raised.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub model: LinearModel,
    pub converged: bool,
    pub iterations: usize,
}

/// Column centering and scaling used internally by the iterative solvers.
/// Columns with zero spread get scale 0 and their weight is pinned at zero.
#[derive(Debug, Clone)]
pub(crate) struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DenseMatrix, center: bool) -> Self {
        let means = if center { x.column_means() } else { vec![0.0; x.cols()] };
        let scales = if center {
            x.column_stds(&means)
        } else {
            // Root mean square when the intercept is off.
            let n = x.rows().max(1) as f64;
            (0..x.cols())
                .map(|j| (x.row_iter().map(|r| r[j] * r[j]).sum::<f64>() / n).sqrt())
                .collect()
        };
        let scales = scales.into_iter().map(|s| if s > 1e-12 { s } else { 0.0 }).collect();
        Self { means, scales }
    }

    pub fn transform(&self, x: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn_rows(x.rows(), x.cols(), |i, out| {
            for (j, o) in out.iter_mut().enumerate() {
                let s = self.scales[j];
                *o = if s > 0.0 {
                    (x.get(i, j) - self.means[j]) / s
                } else {
                    0.0
                };
            }
        })
    }

    /// Maps standardized coefficients (and an intercept on the centered scale)
    /// back to raw-feature weights.
    pub fn unstandardize(&self, coef: &[f64], centered_intercept: f64) -> LinearModel {
        let weights: Vec<f64> = coef
            .iter()
            .zip(&self.scales)
            .map(|(c, s)| if *s > 0.0 { c / s } else { 0.0 })
            .collect();
        let intercept = centered_intercept - dot(&weights, &self.means);
        LinearModel { weights, intercept }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_and_predict() {
        let a = LinearModel::new(vec![1.0, 2.0], 1.0);
        let b = LinearModel::new(vec![3.0, 0.0], -1.0);
        let m = LinearModel::average(&[a, b]).unwrap();
        assert_eq!(m.weights, vec![2.0, 1.0]);
        assert_eq!(m.intercept, 0.0);
        assert_eq!(m.predict(&[1.0, 1.0]), 3.0);
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig::default().validate().is_ok());
        assert!(FitConfig {
            tol: 0.0,
            ..FitConfig::default()
        }
        .validate()
        .is_err());
        assert!(FitConfig {
            max_iters: 0,
            ..FitConfig::default()
        }
        .validate()
        .is_err());
        assert!(FitConfig::with_penalty(-1.0).validate().is_err());
    }

    #[test]
    fn standardizer_roundtrip() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0], vec![5.0, 5.0]]).unwrap();
        let st = Standardizer::fit(&x, true);
        assert_eq!(st.scales[1], 0.0);
        let z = st.transform(&x);
        assert!((z.get(0, 0) + z.get(2, 0)).abs() < 1e-12);
        let m = st.unstandardize(&[2.0, 7.0], 1.0);
        // constant column gets no weight
        assert_eq!(m.weights[1], 0.0);
        let raw = m.predict(x.row(2));
        assert!((raw - (1.0 + 2.0 * z.get(2, 0))).abs() < 1e-12);
    }
}
