use rayon::prelude::*;

use super::config::{BehaviorPolicy, FqiConfig};
use crate::error::Result;
use crate::numerics::{fit_lasso, fit_multinomial_logistic, fit_quantile_l1, DenseMatrix, FitConfig, LinearModel};
use crate::robust::{msm_bound_pair, orthogonal_targets, plugin_targets};

/// Rows used for one regression step: states, actions, and nominal outcomes.
pub(crate) struct Rows<'a> {
    pub states: &'a DenseMatrix,
    pub actions: &'a [usize],
    pub y: &'a [f64],
}

impl Rows<'_> {
    fn with_action(&self, a: usize) -> Vec<usize> {
        (0..self.actions.len()).filter(|&i| self.actions[i] == a).collect()
    }
}

/// Marginal behavior probabilities of the taken actions on `eval`, with the
/// classifier (when estimated) trained on `train`.
pub(crate) fn behavior_probs(cfg: &FqiConfig, num_actions: usize, train: &Rows, eval: &Rows) -> Result<Vec<f64>> {
    match &cfg.behavior_policy {
        BehaviorPolicy::Known(p) => Ok(eval.actions.iter().map(|&a| p[a]).collect()),
        BehaviorPolicy::Fit => {
            let clf = fit_multinomial_logistic(
                train.states,
                train.actions,
                num_actions,
                &FitConfig::with_penalty(cfg.behavior_penalty),
            )?;
            Ok(eval
                .states
                .row_iter()
                .zip(eval.actions)
                .map(|(s, &a)| clf.predict_proba(s)[a].clamp(1e-3, 1.0))
                .collect())
        }
    }
}

/// Fitted model, its pseudo-outcomes, and warnings for one action.
type ActionFit = (LinearModel, Vec<f64>, Vec<String>);

/// One robust Bellman regression: per action, fit the conditional quantile
/// of `Y` on the nuisance rows, form pseudo-outcomes on the regression rows,
/// and regress them on the state. Returns the per-action models and the mean
/// regression target; empty strata yield zero models and a warning.
#[allow(clippy::too_many_arguments)]
pub(crate) fn robust_backup(
    cfg: &FqiConfig,
    num_actions: usize,
    d: usize,
    nuisance: &Rows,
    regression: &Rows,
    pb: &[f64],
    label: &str,
    warnings: &mut Vec<String>,
) -> Result<(Vec<LinearModel>, f64)> {
    let tau = cfg.sensitivity.tau();
    let level = cfg.bound.quantile_level(tau);

    let per_action: Vec<Result<ActionFit>> = (0..num_actions)
        .into_par_iter()
        .map(|a| {
            let mut notes = Vec::new();
            let reg_idx = regression.with_action(a);
            if reg_idx.is_empty() {
                notes.push(format!("{label}: action {a} absent, using the zero model"));
                return Ok((LinearModel::zeros(d), Vec::new(), notes));
            }
            let xs = regression.states.select_rows(&reg_idx);
            let ys: Vec<f64> = reg_idx.iter().map(|&i| regression.y[i]).collect();
            let targets = {
                let nuis_idx = nuisance.with_action(a);
                let (qx, qy) = if nuis_idx.is_empty() {
                    notes.push(format!(
                        "{label}: action {a} absent from nuisance rows, fitting its quantile on the regression rows"
                    ));
                    (xs.clone(), ys.clone())
                } else {
                    (
                        nuisance.states.select_rows(&nuis_idx),
                        nuis_idx.iter().map(|&i| nuisance.y[i]).collect::<Vec<_>>(),
                    )
                };
                let qfit = fit_quantile_l1(&qx, &qy, level, &cfg.quantile_fit)?;
                if !qfit.converged {
                    notes.push(format!("{label}: quantile fit for action {a} did not converge"));
                }
                let z = qfit.model.predict_all(&xs);
                let alpha = reg_idx
                    .iter()
                    .map(|&i| msm_bound_pair(pb[i], &cfg.sensitivity).map(|(lo, _)| lo))
                    .collect::<Result<Vec<_>>>()?;
                if cfg.orthogonal {
                    orthogonal_targets(&ys, &z, &alpha, tau, cfg.bound)?
                } else {
                    plugin_targets(&ys, &z, &alpha, tau, cfg.bound)?
                }
            };
            let fit = fit_lasso(&xs, &targets, &cfg.mean_fit)?;
            if !fit.converged {
                notes.push(format!("{label}: regression for action {a} did not converge"));
            }
            Ok((fit.model, targets, notes))
        })
        .collect();

    let mut models = Vec::with_capacity(num_actions);
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in per_action {
        let (m, targets, notes) = r?;
        sum += targets.iter().sum::<f64>();
        count += targets.len();
        for n in &notes {
            log::warn!("{n}");
        }
        warnings.extend(notes);
        models.push(m);
    }
    Ok((models, if count > 0 { sum / count as f64 } else { 0.0 }))
}
