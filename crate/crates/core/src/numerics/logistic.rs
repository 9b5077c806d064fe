use serde::{Deserialize, Serialize};

use super::linear::{FitConfig, LinearModel, Standardizer};
use super::matrix::{cholesky, cholesky_solve, DenseMatrix};
use crate::error::{check_dim, Error, Result};

/// Multinomial logistic classifier over `num_classes` labels.
///
/// Scores are linear in the raw features; the first observed class is the
/// reference with score 0. Classes never seen in training get probability 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticClassifier {
    pub num_classes: usize,
    /// Observed classes in ascending order; `present[0]` is the reference.
    pub present: Vec<usize>,
    /// Score models for `present[1..]`.
    pub scores: Vec<LinearModel>,
    pub converged: bool,
}

impl LogisticClassifier {
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_classes];
        let mut s = Vec::with_capacity(self.present.len());
        s.push(0.0);
        s.extend(self.scores.iter().map(|m| m.predict(x)));
        let mx = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = s.iter().map(|v| (v - mx).exp()).sum();
        for (k, &cls) in self.present.iter().enumerate() {
            out[cls] = (s[k] - mx).exp() / total;
        }
        out
    }

    pub fn predict_label(&self, x: &[f64]) -> usize {
        let p = self.predict_proba(x);
        (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(0)
    }
}

/// Softmax probabilities for the present classes given standardized
/// features `z` and stacked parameters `[c_1, b_1, c_2, b_2, ...]`.
fn class_probs(z: &[f64], theta: &[f64], k_free: usize, out: &mut [f64]) {
    let p = z.len();
    out[0] = 0.0;
    for k in 0..k_free {
        let base = k * (p + 1);
        out[k + 1] = super::matrix::dot(&theta[base..base + p], z) + theta[base + p];
    }
    let mx = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in out.iter_mut() {
        *v = (*v - mx).exp();
        total += *v;
    }
    for v in out.iter_mut() {
        *v /= total;
    }
}

/// Fits a multinomial logistic regression by Newton's method on the
/// L2-penalized mean negative log-likelihood. The penalty applies to
/// standardized weights; intercepts are unpenalized.
pub fn fit_multinomial_logistic(
    x: &DenseMatrix,
    labels: &[usize],
    num_classes: usize,
    cfg: &FitConfig,
) -> Result<LogisticClassifier> {
    cfg.validate()?;
    check_dim(
        "fit_multinomial_logistic: rows(X) vs len(labels)",
        x.rows(),
        labels.len(),
    )?;
    if x.rows() == 0 {
        return Err(Error::InvalidInput("logistic regression needs at least one row".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(Error::InvalidInput(format!("label {bad} outside 0..{num_classes}")));
    }
    let mut seen = vec![false; num_classes];
    for &l in labels {
        seen[l] = true;
    }
    let present: Vec<usize> = (0..num_classes).filter(|&k| seen[k]).collect();
    let p = x.cols();
    if present.len() == 1 {
        return Ok(LogisticClassifier {
            num_classes,
            present,
            scores: Vec::new(),
            converged: true,
        });
    }
    let mut index = vec![usize::MAX; num_classes];
    for (k, &cls) in present.iter().enumerate() {
        index[cls] = k;
    }

    let st = Standardizer::fit(x, true);
    let z = st.transform(x);
    let n = x.rows() as f64;
    let k_free = present.len() - 1;
    let block = p + 1;
    let dim = k_free * block;
    let pen = cfg.penalty;

    let objective = |theta: &[f64]| -> f64 {
        let mut probs = vec![0.0; k_free + 1];
        let mut nll = 0.0;
        for (row, &l) in z.row_iter().zip(labels) {
            class_probs(row, theta, k_free, &mut probs);
            nll -= probs[index[l]].max(1e-300).ln();
        }
        let mut reg = 0.0;
        for k in 0..k_free {
            reg += theta[k * block..k * block + p].iter().map(|v| v * v).sum::<f64>();
        }
        nll / n + 0.5 * pen * reg
    };

    let mut theta = vec![0.0; dim];
    let mut f = objective(&theta);
    let mut converged = false;
    let mut probs = vec![0.0; k_free + 1];
    for _ in 0..cfg.max_iters.min(500) {
        let mut grad = vec![0.0; dim];
        let mut hess = DenseMatrix::zeros(dim, dim);
        for (row, &l) in z.row_iter().zip(labels) {
            class_probs(row, &theta, k_free, &mut probs);
            let zz: Vec<f64> = row.iter().cloned().chain(std::iter::once(1.0)).collect();
            for k in 0..k_free {
                let resid = probs[k + 1] - f64::from(index[l] == k + 1);
                for (u, zu) in zz.iter().enumerate() {
                    grad[k * block + u] += resid * zu / n;
                }
                for m in 0..=k {
                    let w = probs[k + 1] * (f64::from(k == m) - probs[m + 1]) / n;
                    for (u, zu) in zz.iter().enumerate() {
                        for (v, zv) in zz.iter().enumerate() {
                            let (i, j) = (k * block + u, m * block + v);
                            hess.set(i, j, hess.get(i, j) + w * zu * zv);
                        }
                    }
                }
            }
        }
        for k in 0..k_free {
            for m in 0..k {
                for u in 0..block {
                    for v in 0..block {
                        let val = hess.get(k * block + u, m * block + v);
                        hess.set(m * block + v, k * block + u, val);
                    }
                }
            }
            for u in 0..p {
                let i = k * block + u;
                grad[i] += pen * theta[i];
                hess.set(i, i, hess.get(i, i) + pen);
            }
        }
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < cfg.tol.max(1e-10) {
            converged = true;
            break;
        }
        let mut damping = 1e-10;
        let step = loop {
            let mut m = hess.clone();
            for j in 0..dim {
                m.set(j, j, m.get(j, j) + damping);
            }
            if let Some(l) = cholesky(&m) {
                break cholesky_solve(&l, &grad);
            }
            damping *= 100.0;
        };
        let slope: f64 = -step.iter().zip(&grad).map(|(s, g)| s * g).sum::<f64>();
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..50 {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            let fc = objective(&cand);
            if fc <= f + 1e-4 * t * slope {
                theta = cand;
                moved = f - fc > 0.0;
                f = fc;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            converged = gnorm < 1e-6;
            break;
        }
    }

    let scores = (0..k_free)
        .map(|k| {
            let base = k * block;
            st.unstandardize(&theta[base..base + p], theta[base + p])
        })
        .collect();
    Ok(LogisticClassifier {
        num_classes,
        present,
        scores,
        converged,
    })
}
