//! Robust fitted-Q iteration on the low-dimensional linear-Gaussian
//! environment, compared with the closed-form robust optimal value.

use robustfqi::fqi::{robust_fqi, BehaviorPolicy, FqiConfig};
use robustfqi::sim::{build_lowdim_env, ground_truth_grid, sample_offline, SampleMode};

fn main() -> robustfqi::error::Result<()> {
    let env = build_lowdim_env(0)?;
    let data = sample_offline(&env, 2000, SampleMode::Chunked, 1)?;
    let lambdas = [1.0, 2.0, 8.5];
    let truths = ground_truth_grid(&env, &lambdas, 20_000, 2)?;
    let s0 = vec![0.0; env.d];
    println!("d = {}, T = {}, {} trajectories", env.d, env.horizon, data.len());
    for (lambda, truth) in lambdas.iter().zip(&truths) {
        for orthogonal in [true, false] {
            let cfg = FqiConfig {
                orthogonal,
                behavior_policy: BehaviorPolicy::Known(vec![0.5, 0.5]),
                ..FqiConfig::default()
            }
            .with_lambda(*lambda);
            let fit = robust_fqi(&data, &cfg)?;
            println!(
                "Λ = {lambda:<4} {:<10} V̂_0(0) = {:>8.3}  truth {:>8.3}  action {} (oracle {})",
                if orthogonal { "orthogonal" } else { "plugin" },
                fit.q.max_value(0, &s0),
                truth.value(0, &s0),
                fit.q.greedy_action(0, &s0),
                truth.optimal_actions[0],
            );
        }
    }
    Ok(())
}
