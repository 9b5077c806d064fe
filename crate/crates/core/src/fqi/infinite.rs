use super::config::{Diagnostics, FqiConfig, FqiResult};
use super::step::{behavior_probs, robust_backup, Rows};
use crate::error::{Error, Result};
use crate::mdp::{QFunction, TransitionBatch};
use crate::robust::{nominal_targets, NominalMode};

/// Discounted robust FQI on stationary tuples `(s, a, r, s')`.
///
/// Runs `iters` rounds of the quantile, pseudo-outcome, and regression step
/// against the previous iterate, starting from `Q ≡ 0`. The result is a
/// single-step [`QFunction`] (evaluate it at `t = 0`), and
/// `diagnostics.iterate_change[k]` is the RMS change of `Q(s_i, a_i)` over the
/// data at iteration `k`.
pub fn robust_fqi_infinite(
    batch: &TransitionBatch,
    num_actions: usize,
    cfg: &FqiConfig,
    iters: usize,
) -> Result<FqiResult> {
    cfg.validate(num_actions)?;
    if !(cfg.gamma < 1.0) {
        return Err(Error::InvalidInput(format!(
            "the stationary algorithm needs γ < 1, got {}",
            cfg.gamma
        )));
    }
    if batch.is_empty() {
        return Err(Error::InvalidInput("empty transition batch".into()));
    }
    if let Some(&a) = batch.actions.iter().find(|&&a| a >= num_actions) {
        return Err(Error::InvalidInput(format!("action {a} outside 0..{num_actions}")));
    }
    let d = batch.states.cols();

    let mut q = QFunction::zeros(1, num_actions, d);
    let mut diag = Diagnostics::default();
    let placeholder = vec![0.0; batch.len()];
    let pb = {
        let rows = Rows {
            states: &batch.states,
            actions: &batch.actions,
            y: &placeholder,
        };
        behavior_probs(cfg, num_actions, &rows, &rows)?
    };
    let mut prev: Vec<f64> = vec![0.0; batch.len()];
    for k in 0..iters {
        let y = nominal_targets(&q, 0, batch, cfg.gamma, NominalMode::Max);
        let rows = Rows {
            states: &batch.states,
            actions: &batch.actions,
            y: &y,
        };
        let (models, mean) = robust_backup(
            cfg,
            num_actions,
            d,
            &rows,
            &rows,
            &pb,
            &format!("iter={k}"),
            &mut diag.warnings,
        )?;
        q.set_models(0, models)?;
        let current: Vec<f64> = batch
            .states
            .row_iter()
            .zip(&batch.actions)
            .map(|(s, &a)| q.value(0, s, a))
            .collect();
        let change =
            (current.iter().zip(&prev).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / current.len() as f64).sqrt();
        diag.iterate_change.push(change);
        diag.mean_target.push(mean);
        prev = current;
    }
    Ok(FqiResult::new(q, diag))
}
