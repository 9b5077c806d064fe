use rand::seq::SliceRandom;

use super::config::{Diagnostics, FqiConfig, FqiResult};
use super::step::{behavior_probs, robust_backup, Rows};
use crate::error::{Error, Result};
use crate::mdp::{Policy, QFunction, TrajectoryDataset};
use crate::numerics::{fit_lasso, LinearModel};
use crate::robust::{nominal_targets, NominalMode};
use crate::seeding::rng_for;

fn check_dataset(ds: &TrajectoryDataset, cfg: &FqiConfig) -> Result<()> {
    if ds.is_empty() || ds.horizon() == 0 {
        return Err(Error::InvalidInput(
            "dataset needs at least one trajectory of horizon ≥ 1".into(),
        ));
    }
    cfg.validate(ds.num_actions())
}

fn backward_pass(ds: &TrajectoryDataset, cfg: &FqiConfig, mode: NominalMode) -> Result<FqiResult> {
    check_dataset(ds, cfg)?;
    let (horizon, num_actions, d) = (ds.horizon(), ds.num_actions(), ds.state_dim());
    let mut q = QFunction::zeros(horizon, num_actions, d);
    let mut diag = Diagnostics {
        mean_target: vec![0.0; horizon],
        ..Default::default()
    };
    for t in (0..horizon).rev() {
        let batch = ds.slice_timestep(t)?;
        let y = nominal_targets(&q, t + 1, &batch, cfg.gamma, mode);
        let rows = Rows {
            states: &batch.states,
            actions: &batch.actions,
            y: &y,
        };
        let pb = behavior_probs(cfg, num_actions, &rows, &rows)?;
        let (models, mean) = robust_backup(
            cfg,
            num_actions,
            d,
            &rows,
            &rows,
            &pb,
            &format!("t={t}"),
            &mut diag.warnings,
        )?;
        diag.mean_target[t] = mean;
        q.set_models(t, models)?;
    }
    Ok(FqiResult::new(q, diag))
}

/// Robust fitted-Q iteration: a backward pass of quantile fits,
/// pseudo-outcomes, and per-action regressions with `max` continuation values.
pub fn robust_fqi(ds: &TrajectoryDataset, cfg: &FqiConfig) -> Result<FqiResult> {
    backward_pass(ds, cfg, NominalMode::Max)
}

/// Robust fitted-Q evaluation of `policy`; continuation values are the exact
/// action expectation under the policy.
pub fn robust_fqe(ds: &TrajectoryDataset, policy: &Policy, cfg: &FqiConfig) -> Result<FqiResult> {
    if policy.num_actions() != ds.num_actions() {
        return Err(Error::Dimension {
            context: "robust_fqe: policy actions",
            expected: ds.num_actions(),
            actual: policy.num_actions(),
        });
    }
    let mut res = backward_pass(ds, cfg, NominalMode::Policy(policy))?;
    res.policy = policy.clone();
    Ok(res)
}

/// Standard fitted-Q iteration with the same Lasso regression stack.
pub fn nominal_fqi(ds: &TrajectoryDataset, cfg: &FqiConfig) -> Result<FqiResult> {
    check_dataset(ds, cfg)?;
    let (horizon, num_actions, d) = (ds.horizon(), ds.num_actions(), ds.state_dim());
    let mut q = QFunction::zeros(horizon, num_actions, d);
    let mut diag = Diagnostics {
        mean_target: vec![0.0; horizon],
        ..Default::default()
    };
    for t in (0..horizon).rev() {
        let batch = ds.slice_timestep(t)?;
        let y = nominal_targets(&q, t + 1, &batch, cfg.gamma, NominalMode::Max);
        diag.mean_target[t] = y.iter().sum::<f64>() / y.len() as f64;
        let mut models = Vec::with_capacity(num_actions);
        for a in 0..num_actions {
            let idx = batch.rows_with_action(a);
            if idx.is_empty() {
                diag.warnings
                    .push(format!("t={t}: action {a} absent, using the zero model"));
                models.push(LinearModel::zeros(d));
                continue;
            }
            let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            let fit = fit_lasso(&batch.states.select_rows(&idx), &ys, &cfg.mean_fit)?;
            if !fit.converged {
                diag.warnings
                    .push(format!("t={t}: regression for action {a} did not converge"));
            }
            models.push(fit.model);
        }
        q.set_models(t, models)?;
    }
    Ok(FqiResult::new(q, diag))
}

/// Cross-fitted robust FQI with `cfg.crossfit_folds = K` folds.
///
/// Trajectories are split into `K` groups by a seeded permutation; the row of
/// trajectory `i` at step `t` belongs to fold `(group(i) + t) mod K`, so for
/// `K = 2` a trajectory alternates folds between even and odd steps. For each
/// fold `k`, nuisances (behavior policy and quantiles) are fit on fold `k` and
/// the pseudo-outcome regression uses the remaining rows, continuing from that
/// fold's own chain of Q estimates. The reported Q averages the fold estimates.
/// `K = 1` is plain [`robust_fqi`].
pub fn robust_fqi_crossfit(ds: &TrajectoryDataset, cfg: &FqiConfig) -> Result<FqiResult> {
    check_dataset(ds, cfg)?;
    let k_folds = cfg.crossfit_folds;
    if k_folds == 1 {
        return robust_fqi(ds, cfg);
    }
    let n = ds.len();
    if n < 2 * k_folds {
        return Err(Error::InvalidInput(format!(
            "cross-fitting with {k_folds} folds needs at least {} trajectories, got {n}",
            2 * k_folds
        )));
    }
    let (horizon, num_actions, d) = (ds.horizon(), ds.num_actions(), ds.state_dim());
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_for(cfg.seed, 0x666f_6c64));
    let mut group = vec![0usize; n];
    for (pos, &i) in perm.iter().enumerate() {
        group[i] = pos % k_folds;
    }

    let mut fold_q: Vec<QFunction> = (0..k_folds)
        .map(|_| QFunction::zeros(horizon, num_actions, d))
        .collect();
    let mut q = QFunction::zeros(horizon, num_actions, d);
    let mut diag = Diagnostics {
        mean_target: vec![0.0; horizon],
        ..Default::default()
    };
    for t in (0..horizon).rev() {
        let batch = ds.slice_timestep(t)?;
        let mut fold_models = Vec::with_capacity(k_folds);
        let mut mean_acc = 0.0;
        for (k, qk) in fold_q.iter_mut().enumerate() {
            let in_fold: Vec<usize> = (0..n).filter(|&i| (group[i] + t) % k_folds == k).collect();
            let rest: Vec<usize> = (0..n).filter(|&i| (group[i] + t) % k_folds != k).collect();
            let y = nominal_targets(qk, t + 1, &batch, cfg.gamma, NominalMode::Max);
            let nb = batch.select(&in_fold);
            let rb = batch.select(&rest);
            let ny: Vec<f64> = in_fold.iter().map(|&i| y[i]).collect();
            let ry: Vec<f64> = rest.iter().map(|&i| y[i]).collect();
            let nuis = Rows {
                states: &nb.states,
                actions: &nb.actions,
                y: &ny,
            };
            let reg = Rows {
                states: &rb.states,
                actions: &rb.actions,
                y: &ry,
            };
            let pb = behavior_probs(cfg, num_actions, &nuis, &reg)?;
            let (models, mean) = robust_backup(
                cfg,
                num_actions,
                d,
                &nuis,
                &reg,
                &pb,
                &format!("t={t}, fold={k}"),
                &mut diag.warnings,
            )?;
            mean_acc += mean / k_folds as f64;
            qk.set_models(t, models.clone())?;
            fold_models.push(models);
        }
        let averaged = (0..num_actions)
            .map(|a| LinearModel::average(&fold_models.iter().map(|m| m[a].clone()).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        q.set_models(t, averaged)?;
        diag.mean_target[t] = mean_acc;
    }
    Ok(FqiResult::new(q, diag))
}
