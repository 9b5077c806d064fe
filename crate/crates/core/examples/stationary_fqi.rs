//! Discounted infinite-horizon robust FQI on a two-state tabular MDP.

use robustfqi::fqi::{robust_fqi_infinite, BehaviorPolicy, FqiConfig};
use robustfqi::numerics::FitConfig;
use robustfqi::sim::{one_hot, two_state_mdp};

fn main() -> robustfqi::error::Result<()> {
    let mdp = two_state_mdp(0.8, 1);
    let exact = mdp.discounted_q(1e-12)?;
    let batch = mdp.exact_batch(4)?;
    let unpenalized = FitConfig {
        penalty: 0.0,
        fit_intercept: false,
        ..FitConfig::default()
    };
    for lambda in [1.0, 2.0, 5.0] {
        let cfg = FqiConfig {
            gamma: mdp.gamma,
            behavior_policy: BehaviorPolicy::Known(vec![0.5, 0.5]),
            mean_fit: unpenalized.clone(),
            quantile_fit: unpenalized.clone(),
            ..FqiConfig::default()
        }
        .with_lambda(lambda);
        let fit = robust_fqi_infinite(&batch, 2, &cfg, 200)?;
        for (s, nominal) in exact.iter().enumerate() {
            println!(
                "Λ = {lambda}: Q(s{s}, ·) = {:.4?} (nominal exact {nominal:.4?})",
                fit.q.values(0, &one_hot(s, 2)),
            );
        }
    }
    Ok(())
}
