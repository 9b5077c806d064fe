//! Cross-fitted robust FQI: quantiles are fit on one fold and the
//! pseudo-outcome regression on the other.

use robustfqi::fqi::{robust_fqi, robust_fqi_crossfit, BehaviorPolicy, FqiConfig};
use robustfqi::sim::{build_lowdim_env, ground_truth, sample_offline, SampleMode};

fn main() -> robustfqi::error::Result<()> {
    let env = build_lowdim_env(0)?;
    let data = sample_offline(&env, 4000, SampleMode::Chunked, 5)?;
    let lambda = 5.25;
    let truth = ground_truth(&env, lambda, 20_000, 6)?;
    let s0 = vec![0.0; env.d];
    for folds in [1, 2, 3] {
        let cfg = FqiConfig {
            crossfit_folds: folds,
            behavior_policy: BehaviorPolicy::Known(vec![0.5, 0.5]),
            seed: 7,
            ..FqiConfig::default()
        }
        .with_lambda(lambda);
        let fit = if folds == 1 {
            robust_fqi(&data, &cfg)?
        } else {
            robust_fqi_crossfit(&data, &cfg)?
        };
        println!(
            "{folds} fold(s): V̂_0(0) = {:.3} (truth {:.3})",
            fit.q.max_value(0, &s0),
            truth.value(0, &s0)
        );
    }
    Ok(())
}
