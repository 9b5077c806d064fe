use super::linear::{Fit, FitConfig, LinearModel, Standardizer};
use super::matrix::{cholesky, cholesky_solve, DenseMatrix};
use crate::error::{check_dim, Error, Result};

/// Check (pinball) loss at quantile level `level`.
#[inline]
pub fn pinball(r: f64, level: f64) -> f64 {
    if r >= 0.0 {
        level * r
    } else {
        (level - 1.0) * r
    }
}

/// Mean pinball loss of `model` on `(x, y)` plus `penalty·‖w‖₁`.
pub fn pinball_objective(x: &DenseMatrix, y: &[f64], level: f64, model: &LinearModel, penalty: f64) -> f64 {
    let n = x.rows().max(1) as f64;
    let loss: f64 = x
        .row_iter()
        .zip(y)
        .map(|(row, yi)| pinball(yi - model.predict(row), level))
        .sum::<f64>()
        / n;
    loss + penalty * model.weights.iter().map(|w| w.abs()).sum::<f64>()
}

/// Huber function with threshold `h`, a smooth surrogate for `|r|`.
#[inline]
fn huber(r: f64, h: f64) -> f64 {
    let a = r.abs();
    if a <= h {
        r * r / (2.0 * h)
    } else {
        a - h / 2.0
    }
}

/// Working problem on standardized features and a rescaled response.
struct Problem<'a> {
    z: &'a DenseMatrix,
    y: &'a [f64],
    level: f64,
    pen: Vec<f64>,
    intercept: bool,
    active: Vec<bool>,
}

impl Problem<'_> {
    fn n(&self) -> f64 {
        self.z.rows() as f64
    }

    fn residuals(&self, c: &[f64], b: f64) -> Vec<f64> {
        self.z
            .row_iter()
            .zip(self.y)
            .map(|(row, yi)| yi - super::matrix::dot(row, c) - b)
            .collect()
    }

    fn exact_objective(&self, r: &[f64], c: &[f64]) -> f64 {
        r.iter().map(|&ri| pinball(ri, self.level)).sum::<f64>() / self.n()
            + c.iter().zip(&self.pen).map(|(ci, p)| p * ci.abs()).sum::<f64>()
    }

    fn smoothed_objective(&self, r: &[f64], c: &[f64], h: f64) -> f64 {
        let shift = self.level - 0.5;
        r.iter().map(|&ri| 0.5 * huber(ri, h) + shift * ri).sum::<f64>() / self.n()
            + c.iter().zip(&self.pen).map(|(ci, p)| p * huber(*ci, h)).sum::<f64>()
    }
}

/// L1-penalized linear quantile regression at `level`, minimizing
/// `(1/n)Σ ρ_level(y − Xw − b) + penalty·‖w‖₁` with an unpenalized intercept.
///
/// A smoothed objective is minimized by damped Newton steps while the
/// smoothing width shrinks, then exact coordinate-wise minimization polishes
/// the unsmoothed objective. The best iterate found is returned.
pub fn fit_quantile_l1(x: &DenseMatrix, y: &[f64], level: f64, cfg: &FitConfig) -> Result<Fit> {
    cfg.validate()?;
    check_dim("fit_quantile_l1: rows(X) vs len(y)", x.rows(), y.len())?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "quantile level must lie in (0, 1), got {level}"
        )));
    }
    if x.rows() == 0 {
        return Err(Error::InvalidInput("quantile regression needs at least one row".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite response".into()));
    }

    let p = x.cols();
    let st = Standardizer::fit(x, cfg.fit_intercept);
    let z = st.transform(x);
    let center = if cfg.fit_intercept { median(y) } else { 0.0 };
    let spread = {
        let m = y.iter().map(|v| (v - center).abs()).sum::<f64>() / y.len() as f64;
        if m > 1e-12 {
            m
        } else {
            1.0
        }
    };
    let ys: Vec<f64> = y.iter().map(|v| (v - center) / spread).collect();
    let pen: Vec<f64> = st
        .scales
        .iter()
        .map(|&s| if s > 0.0 { cfg.penalty / s } else { 0.0 })
        .collect();
    let prob = Problem {
        z: &z,
        y: &ys,
        level,
        pen,
        intercept: cfg.fit_intercept,
        active: st.scales.iter().map(|&s| s > 0.0).collect(),
    };

    let mut c = vec![0.0; p];
    let mut b = 0.0;
    let mut iterations = 0;
    let mut best = (prob.exact_objective(&prob.residuals(&c, b), &c), c.clone(), b);

    let budget = cfg.max_iters;
    let mut h = 1.0;
    while h >= 1e-5 * 0.99 && iterations < budget {
        iterations += newton_stage(&prob, &mut c, &mut b, h, cfg.tol, budget - iterations);
        let obj = prob.exact_objective(&prob.residuals(&c, b), &c);
        if obj < best.0 {
            best = (obj, c.clone(), b);
        }
        h *= 0.1;
    }

    let mut converged = false;
    for _ in 0..3 {
        if let Some((vc, vb)) = snap_to_vertex(&prob, &best.1, best.2) {
            let obj = prob.exact_objective(&prob.residuals(&vc, vb), &vc);
            if obj < best.0 {
                best = (obj, vc, vb);
            }
        }
        let (mut c, mut b) = (best.1.clone(), best.2);
        let mut r = prob.residuals(&c, b);
        let mut obj = best.0;
        converged = false;
        while iterations < budget {
            iterations += 1;
            coordinate_sweep(&prob, &mut c, &mut b, &mut r);
            let new_obj = prob.exact_objective(&r, &c);
            let gain = obj - new_obj;
            obj = new_obj;
            if gain <= cfg.tol * spread.recip() * 1e-2 {
                converged = true;
                break;
            }
        }
        if obj < best.0 - 1e-15 {
            best = (obj, c, b);
        } else {
            break;
        }
    }

    let (_, c, b) = best;
    let c: Vec<f64> = c.iter().map(|v| v * spread).collect();
    let mut model = st.unstandardize(&c, b * spread + center);
    if !cfg.fit_intercept {
        model.intercept = 0.0;
    }
    Ok(Fit {
        model,
        converged,
        iterations,
    })
}

fn median(y: &[f64]) -> f64 {
    let mut v = y.to_vec();
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

/// Damped Newton with Armijo backtracking on the smoothed objective at width `h`.
fn newton_stage(prob: &Problem, c: &mut [f64], b: &mut f64, h: f64, tol: f64, budget: usize) -> usize {
    let p = c.len();
    let dim = p + usize::from(prob.intercept);
    let n = prob.n();
    let shift = prob.level - 0.5;
    let mut r = prob.residuals(c, *b);
    let mut f = prob.smoothed_objective(&r, c, h);
    let mut iters = 0;
    while iters < budget.min(100) {
        iters += 1;
        let mut grad = vec![0.0; dim];
        let mut hess = DenseMatrix::zeros(dim, dim);
        for (i, row) in prob.z.row_iter().enumerate() {
            let ri = r[i];
            let psi = 0.5 * (ri / h).clamp(-1.0, 1.0) + shift;
            for j in 0..p {
                grad[j] -= psi * row[j] / n;
            }
            if prob.intercept {
                grad[p] -= psi / n;
            }
            if ri.abs() <= h {
                let w = 0.5 / (h * n);
                for j in 0..dim {
                    let zj = if j < p { row[j] } else { 1.0 };
                    if zj == 0.0 {
                        continue;
                    }
                    for k in 0..=j {
                        let zk = if k < p { row[k] } else { 1.0 };
                        hess.set(j, k, hess.get(j, k) + w * zj * zk);
                    }
                }
            }
        }
        for j in 0..p {
            if !prob.active[j] {
                grad[j] = 0.0;
                continue;
            }
            grad[j] += prob.pen[j] * (c[j] / h).clamp(-1.0, 1.0);
            if c[j].abs() <= h {
                hess.set(j, j, hess.get(j, j) + prob.pen[j] / h);
            }
        }
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < tol {
            break;
        }
        let diag_max = (0..dim).map(|j| hess.get(j, j)).fold(0.0f64, f64::max);
        let mut damping = 1e-10 * diag_max.max(1.0);
        for j in 0..dim {
            for k in 0..j {
                hess.set(k, j, hess.get(j, k));
            }
        }
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
        let mut accepted = false;
        for _ in 0..60 {
            let c_new: Vec<f64> = (0..p)
                .map(|j| if prob.active[j] { c[j] - t * step[j] } else { 0.0 })
                .collect();
            let b_new = if prob.intercept { *b - t * step[p] } else { 0.0 };
            let r_new = prob.residuals(&c_new, b_new);
            let f_new = prob.smoothed_objective(&r_new, &c_new, h);
            if f_new <= f + 1e-4 * t * slope {
                let moved = (f - f_new).abs();
                c.copy_from_slice(&c_new);
                *b = b_new;
                r = r_new;
                f = f_new;
                accepted = true;
                if moved < tol * 1e-3 {
                    return iters;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    iters
}

/// Interpolates the observations with the smallest residuals using the
/// currently nonzero coordinates, giving the vertex of the piecewise-linear
/// objective nearest the given point.
fn snap_to_vertex(prob: &Problem, c: &[f64], b: f64) -> Option<(Vec<f64>, f64)> {
    let p = c.len();
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut unknowns: Vec<usize> = (0..p)
        .filter(|&j| prob.active[j] && c[j].abs() > 1e-9 * scale)
        .collect();
    if prob.intercept {
        unknowns.push(p);
    }
    let m = unknowns.len();
    if m == 0 {
        return None;
    }
    let r = prob.residuals(c, b);
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs()));

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for &i in &order {
        let row = prob.z.row(i);
        let v: Vec<f64> = unknowns.iter().map(|&j| if j < p { row[j] } else { 1.0 }).collect();
        let mut w = v.clone();
        for q in &basis {
            let d = super::matrix::dot(&w, q);
            super::matrix::axpy(-d, q, &mut w);
        }
        let nw = super::matrix::norm2(&w);
        if nw > 1e-8 * super::matrix::norm2(&v).max(1e-300) {
            basis.push(w.iter().map(|x| x / nw).collect());
            rows.push(v);
            rhs.push(prob.y[i]);
            if rows.len() == m {
                break;
            }
        }
    }
    if rows.len() < m {
        return None;
    }
    let a = DenseMatrix::from_rows(&rows).ok()?;
    let theta = super::matrix::min_norm_solve(&a, &rhs).ok()?;
    let mut nc = vec![0.0; p];
    let mut nb = 0.0;
    for (k, &j) in unknowns.iter().enumerate() {
        if j < p {
            nc[j] = theta[k];
        } else {
            nb = theta[k];
        }
    }
    Some((nc, nb))
}

/// One pass of exact coordinate minimization on the unsmoothed objective.
/// Each one-dimensional problem is a weighted quantile of breakpoints.
fn coordinate_sweep(prob: &Problem, c: &mut [f64], b: &mut f64, r: &mut [f64]) {
    let p = c.len();
    let n = prob.n();
    let mut breaks: Vec<(f64, f64, f64)> = Vec::with_capacity(r.len() + 1);
    let coords = (0..p).chain(if prob.intercept { Some(p) } else { None });
    for j in coords {
        if j < p && !prob.active[j] {
            continue;
        }
        breaks.clear();
        for (i, row) in prob.z.row_iter().enumerate() {
            let a = if j < p { row[j] } else { 1.0 };
            if a == 0.0 {
                continue;
            }
            // ρ_q(r − aδ) = |a|·ρ_{q'}(r/a − δ) with q' = q for a > 0, 1 − q for a < 0
            let q = if a > 0.0 { prob.level } else { 1.0 - prob.level };
            breaks.push((r[i] / a, a.abs() / n, q));
        }
        let current = if j < p { c[j] } else { *b };
        if j < p && prob.pen[j] > 0.0 {
            breaks.push((-current, 2.0 * prob.pen[j], 0.5));
        }
        if breaks.is_empty() {
            continue;
        }
        breaks.sort_by(|x, y| x.0.total_cmp(&y.0));
        // derivative just left of the first breakpoint
        let mut deriv: f64 = -breaks.iter().map(|(_, w, q)| w * q).sum::<f64>();
        let mut delta = breaks[breaks.len() - 1].0;
        for &(t, w, _) in &breaks {
            deriv += w;
            if deriv >= 0.0 {
                delta = t;
                break;
            }
        }
        if delta == 0.0 {
            continue;
        }
        for (i, row) in prob.z.row_iter().enumerate() {
            let a = if j < p { row[j] } else { 1.0 };
            r[i] -= a * delta;
        }
        if j < p {
            c[j] += delta;
        } else {
            *b += delta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn sorted_quantile(y: &[f64], level: f64) -> f64 {
        let mut v = y.to_vec();
        v.sort_by(f64::total_cmp);
        let k = ((level * v.len() as f64).ceil() as usize).max(1);
        v[k - 1]
    }

    fn intercept_only(y: &[f64], level: f64) -> f64 {
        let x = DenseMatrix::zeros(y.len(), 0);
        fit_quantile_l1(&x, y, level, &FitConfig::default())
            .unwrap()
            .model
            .intercept
    }

    #[test]
    fn median_of_odd_sample() {
        let y = [5.0, -1.0, 3.0, 10.0, 2.0];
        assert!((intercept_only(&y, 0.5) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn ninetieth_percentile_of_grid() {
        let y: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        let q = intercept_only(&y, 0.9);
        let oracle = sorted_quantile(&y, 0.9);
        assert!((q - oracle).abs() <= 1.0 + 1e-9, "got {q}, oracle {oracle}");
    }

    #[test]
    fn slope_recovered_under_symmetric_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 2000;
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let y: Vec<f64> = xs
            .iter()
            .map(|x| 2.0 * x + 0.5 * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let x = DenseMatrix::new(n, 1, xs).unwrap();
        let fit = fit_quantile_l1(&x, &y, 0.5, &FitConfig::with_penalty(1e-8)).unwrap();
        // LAD slope s.e. ≈ sqrt(π/2)·σ / (sd(x)·sqrt(n)) ≈ 0.024
        assert!((fit.model.weights[0] - 2.0).abs() < 3.0 * 0.025);
    }

    /// Exhaustive oracle for one feature with intercept: some optimum
    /// interpolates two data points.
    fn pairwise_oracle(xs: &[f64], y: &[f64], level: f64) -> f64 {
        let x = DenseMatrix::new(xs.len(), 1, xs.to_vec()).unwrap();
        let mut best = f64::INFINITY;
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if xs[i] == xs[j] {
                    continue;
                }
                let slope = (y[j] - y[i]) / (xs[j] - xs[i]);
                let m = LinearModel::new(vec![slope], y[i] - slope * xs[i]);
                best = best.min(pinball_objective(&x, y, level, &m, 0.0));
            }
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn matches_exhaustive_oracle(seed in 0u64..100_000, level in 0.05f64..0.95) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..25).map(|_| rng.random::<f64>() * 3.0).collect();
            let y: Vec<f64> = xs.iter().map(|x| x - 1.0 + rng.random::<f64>() * 2.0).collect();
            let x = DenseMatrix::new(25, 1, xs.clone()).unwrap();
            let fit = fit_quantile_l1(&x, &y, level, &FitConfig::default()).unwrap();
            let got = pinball_objective(&x, &y, level, &fit.model, 0.0);
            let oracle = pairwise_oracle(&xs, &y, level);
            prop_assert!(got <= oracle + 1e-8, "got {} oracle {}", got, oracle);
        }

        #[test]
        fn perturbations_do_not_improve(seed in 0u64..100_000, level in 0.1f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 80;
            let p = 3;
            let data: Vec<f64> = (0..n * p).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let x = DenseMatrix::new(n, p, data).unwrap();
            let y: Vec<f64> = x.row_iter().map(|r| r[0] - 0.5 * r[1] + rng.random::<f64>()).collect();
            let cfg = FitConfig::with_penalty(1e-2);
            let fit = fit_quantile_l1(&x, &y, level, &cfg).unwrap();
            let base = pinball_objective(&x, &y, level, &fit.model, cfg.penalty);
            let eps = 10.0 * cfg.tol;
            for j in 0..=p {
                for s in [-eps, eps] {
                    let mut m = fit.model.clone();
                    if j < p { m.weights[j] += s } else { m.intercept += s }
                    let o = pinball_objective(&x, &y, level, &m, cfg.penalty);
                    prop_assert!(o >= base - cfg.tol);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_level() {
        let x = DenseMatrix::zeros(3, 1);
        assert!(fit_quantile_l1(&x, &[1.0, 2.0, 3.0], 0.0, &FitConfig::default()).is_err());
        assert!(fit_quantile_l1(&x, &[1.0, 2.0, 3.0], 1.0, &FitConfig::default()).is_err());
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let x = DenseMatrix::new(100, 2, data).unwrap();
        let y: Vec<f64> = x.row_iter().map(|r| r[0] + r[1] * r[1]).collect();
        let a = fit_quantile_l1(&x, &y, 0.3, &FitConfig::with_penalty(1e-2)).unwrap();
        let b = fit_quantile_l1(&x, &y, 0.3, &FitConfig::with_penalty(1e-2)).unwrap();
        assert_eq!(a, b);
    }
}
