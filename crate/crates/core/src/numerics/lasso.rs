use super::linear::{Fit, FitConfig, Standardizer};
use super::matrix::DenseMatrix;
use crate::error::{check_dim, Error, Result};

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// L1-penalized least squares, minimizing
/// `(1/2n)‖y − Xw − b‖² + penalty·‖w‖₁` with an unpenalized intercept.
///
/// Coordinate descent runs on standardized columns with the penalty kept on
/// the raw scale. Iteration stops once the largest raw-scale coefficient move
/// drops below `tol` and the KKT conditions hold to the same tolerance.
pub fn fit_lasso(x: &DenseMatrix, y: &[f64], cfg: &FitConfig) -> Result<Fit> {
    cfg.validate()?;
    check_dim("fit_lasso: rows(X) vs len(y)", x.rows(), y.len())?;
    if x.rows() == 0 {
        return Err(Error::InvalidInput("lasso needs at least one row".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite response".into()));
    }
    let n = x.rows() as f64;
    let p = x.cols();
    let st = Standardizer::fit(x, cfg.fit_intercept);
    let z = st.transform(x);
    let ymean = if cfg.fit_intercept {
        y.iter().sum::<f64>() / n
    } else {
        0.0
    };
    let yc: Vec<f64> = y.iter().map(|v| v - ymean).collect();

    let mut g = z.gram();
    for v in 0..p {
        for u in 0..p {
            g.set(v, u, g.get(v, u) / n);
        }
    }
    let q: Vec<f64> = z.t_matvec(&yc)?.into_iter().map(|v| v / n).collect();
    let pen: Vec<f64> = st
        .scales
        .iter()
        .map(|&s| if s > 0.0 { cfg.penalty / s } else { f64::INFINITY })
        .collect();

    let mut c = vec![0.0; p];
    // grad = G c − q, maintained incrementally
    let mut grad: Vec<f64> = q.iter().map(|v| -v).collect();
    let mut converged = p == 0;
    let mut iterations = 0;
    let kkt_tol = 10.0 * cfg.tol;

    while !converged && iterations < cfg.max_iters {
        iterations += 1;
        let mut max_move = 0.0f64;
        for j in 0..p {
            let gjj = g.get(j, j);
            if st.scales[j] == 0.0 || gjj <= 0.0 {
                continue;
            }
            let old = c[j];
            let rho = gjj * old - grad[j];
            let new = soft_threshold(rho, pen[j]) / gjj;
            let delta = new - old;
            if delta != 0.0 {
                c[j] = new;
                for (k, gk) in grad.iter_mut().enumerate() {
                    *gk += g.get(k, j) * delta;
                }
                max_move = max_move.max(delta.abs() / st.scales[j]);
            }
        }
        if max_move < cfg.tol {
            let violation = (0..p)
                .filter(|&j| st.scales[j] > 0.0)
                .map(|j| {
                    let v = if c[j] == 0.0 {
                        (grad[j].abs() - pen[j]).max(0.0)
                    } else {
                        (grad[j] + c[j].signum() * pen[j]).abs()
                    };
                    v * st.scales[j]
                })
                .fold(0.0, f64::max);
            converged = violation <= kkt_tol;
        }
    }

    let mut model = st.unstandardize(&c, ymean);
    if !cfg.fit_intercept {
        model.intercept = 0.0;
    }
    Ok(Fit {
        model,
        converged,
        iterations,
    })
}
