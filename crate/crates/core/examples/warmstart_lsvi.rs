//! LSVI-UCB on the confounded environment with no warm start, a robust
//! warm start, and a naive warm start from the same observational data.

use std::sync::Arc;

use robustfqi::fqi::BehaviorPolicy;
use robustfqi::lsvi::{estimate_optimal_value, lsvi_ucb_against, OnlineConfig, WarmStart};
use robustfqi::sim::{build_warmstart_env, sample_confounded};

fn main() -> robustfqi::error::Result<()> {
    let env = build_warmstart_env(0)?;
    let optimal = estimate_optimal_value(&env, 50_000, 1)?;
    let comparator = optimal.policy();
    let offline = Arc::new(sample_confounded(&env, 2000, 2)?);
    let modes = [
        WarmStart::None,
        WarmStart::Robust {
            lambda: 3.0,
            offline: Arc::clone(&offline),
            behavior: BehaviorPolicy::Known(vec![0.25; 4]),
            per_episode: false,
        },
        WarmStart::Naive { offline },
    ];
    for warmstart in modes {
        let cfg = OnlineConfig {
            episodes: 60,
            trials: 4,
            rollouts_per_eval: 200,
            warmstart,
            ..OnlineConfig::default()
        };
        let trace = lsvi_ucb_against(&env, &cfg, &comparator)?;
        let fin = trace.final_cumulative();
        println!(
            "{:<7} cumulative regret after 60 episodes {:.3} ± {:.3}",
            cfg.warmstart.label(),
            fin.mean,
            fin.se
        );
    }
    Ok(())
}
