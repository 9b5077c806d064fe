//! Robust bounds on the value of a fixed policy: lower and upper robust
//! fitted-Q evaluation bracket the nominal estimate.

use robustfqi::fqi::{robust_fqe, BehaviorPolicy, FqiConfig};
use robustfqi::mdp::Policy;
use robustfqi::robust::Bound;
use robustfqi::sim::{build_lowdim_env, sample_offline, SampleMode};

fn main() -> robustfqi::error::Result<()> {
    let env = build_lowdim_env(0)?;
    let data = sample_offline(&env, 3000, SampleMode::Chunked, 4)?;
    let always_one = Policy::fixed(2, |_, _| 1);
    let s0 = vec![0.0; env.d];
    for lambda in [1.0, 2.0, 5.0] {
        let mut values = Vec::new();
        for bound in [Bound::Lower, Bound::Upper] {
            let cfg = FqiConfig {
                bound,
                behavior_policy: BehaviorPolicy::Known(vec![0.5, 0.5]),
                ..FqiConfig::default()
            }
            .with_lambda(lambda);
            values.push(robust_fqe(&data, &always_one, &cfg)?.q.value(0, &s0, 1));
        }
        println!(
            "Λ = {lambda}: V(always 1) at s = 0 in [{:.3}, {:.3}]",
            values[0], values[1]
        );
    }
    Ok(())
}
