use super::linear::LinearModel;
use super::matrix::{cholesky, cholesky_solve, min_norm_solve, DenseMatrix};
use crate::error::{check_dim, Error, Result};

/// Minimizes `(1/n)‖y − Xw − b‖² + ridge·‖w‖²`.
///
/// With `ridge == 0` and a rank-deficient design the minimum-norm solution is
/// returned (SVD route). The intercept is never penalized.
pub fn fit_least_squares(x: &DenseMatrix, y: &[f64], ridge: f64, intercept: bool) -> Result<LinearModel> {
    check_dim("fit_least_squares: rows(X) vs len(y)", x.rows(), y.len())?;
    if x.rows() == 0 {
        return Err(Error::InvalidInput("least squares needs at least one row".into()));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidInput(format!("ridge must be nonnegative, got {ridge}")));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite response".into()));
    }
    let n = x.rows() as f64;
    let p = x.cols();

    let (xc, yc, xmean, ymean) = if intercept {
        let xmean = x.column_means();
        let ymean = y.iter().sum::<f64>() / n;
        let xc = DenseMatrix::from_fn_rows(x.rows(), p, |i, out| {
            for (j, o) in out.iter_mut().enumerate() {
                *o = x.get(i, j) - xmean[j];
            }
        });
        let yc: Vec<f64> = y.iter().map(|v| v - ymean).collect();
        (xc, yc, xmean, ymean)
    } else {
        (x.clone(), y.to_vec(), vec![0.0; p], 0.0)
    };

    let weights = if p == 0 {
        Vec::new()
    } else if ridge > 0.0 {
        let mut g = xc.gram();
        for j in 0..p {
            for k in 0..p {
                g.set(j, k, g.get(j, k) / n);
            }
            g.set(j, j, g.get(j, j) + ridge);
        }
        let rhs: Vec<f64> = xc.t_matvec(&yc)?.into_iter().map(|v| v / n).collect();
        let l = cholesky(&g).ok_or_else(|| Error::Domain("ridge normal equations not positive definite".into()))?;
        cholesky_solve(&l, &rhs)
    } else {
        min_norm_solve(&xc, &yc)?
    };
    let intercept_value = if intercept {
        ymean - super::matrix::dot(&weights, &xmean)
    } else {
        0.0
    };
    Ok(LinearModel::new(weights, intercept_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Gauss-Jordan solve of the augmented normal equations, written out
    /// independently of the SVD path under test.
    fn normal_equations_oracle(x: &DenseMatrix, y: &[f64]) -> Vec<f64> {
        let p = x.cols() + 1;
        let mut a = vec![vec![0.0; p + 1]; p];
        for (i, row) in x.row_iter().enumerate() {
            let mut z = row.to_vec();
            z.push(1.0);
            for j in 0..p {
                for k in 0..p {
                    a[j][k] += z[j] * z[k];
                }
                a[j][p] += z[j] * y[i];
            }
        }
        for c in 0..p {
            let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, piv);
            let d = a[c][c];
            for v in a[c].iter_mut() {
                *v /= d;
            }
            for r in 0..p {
                if r != c {
                    let f = a[r][c];
                    let pivot_row = a[c].clone();
                    for (v, pv) in a[r].iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        a.iter().map(|r| r[p]).collect()
    }

    #[test]
    fn identity_design_exact_fit() {
        let x = DenseMatrix::identity(2);
        let m = fit_least_squares(&x, &[3.0, 5.0], 0.0, false).unwrap();
        assert!((m.weights[0] - 3.0).abs() < 1e-12);
        assert!((m.weights[1] - 5.0).abs() < 1e-12);
        assert_eq!(m.intercept, 0.0);
    }

    #[test]
    fn constant_response_goes_to_intercept() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..20).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let m = fit_least_squares(&x, &[4.25; 20], 0.0, true).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-12));
        assert!((m.intercept - 4.25).abs() < 1e-12);
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 1.5 * r[0] - 2.0 * r[1] + 0.3 * r[2] + 0.7 + rng.random::<f64>() - 0.5)
            .collect();
        let m = fit_least_squares(&x, &y, 0.0, true).unwrap();
        let oracle = normal_equations_oracle(&x, &y);
        for j in 0..3 {
            assert!((m.weights[j] - oracle[j]).abs() < 1e-8);
        }
        assert!((m.intercept - oracle[3]).abs() < 1e-8);
    }

    #[test]
    fn ridge_shrinks() {
        let x = DenseMatrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        // (1/n) Σ x² = 1, so w = 1/(1 + ridge)
        let m = fit_least_squares(&x, &[1.0, -1.0], 1.0, false).unwrap();
        assert!((m.weights[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_min_norm() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        let m = fit_least_squares(&x, &[2.0, 4.0, 6.0], 0.0, false).unwrap();
        assert!((m.weights[0] - 1.0).abs() < 1e-10 && (m.weights[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let x = DenseMatrix::identity(2);
        assert!(fit_least_squares(&x, &[1.0], 0.0, true).is_err());
        assert!(fit_least_squares(&DenseMatrix::zeros(0, 2), &[], 0.0, true).is_err());
    }
}
