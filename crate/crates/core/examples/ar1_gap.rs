//! Exact robust gap of the AR(1) example as the horizon grows.

use robustfqi::sim::ar1_robust_gap;

fn main() -> robustfqi::error::Result<()> {
    println!("{:>5} {:>4} {:>10} {:>10}", "θ_P", "T", "gap", "log bound");
    for theta_p in [0.5, 1.0, 1.3] {
        for horizon in [1, 2, 4, 8, 16] {
            let g = ar1_robust_gap(theta_p, 1.0, 1.0, horizon, 5.0)?;
            println!("{theta_p:>5} {horizon:>4} {:>10.4} {:>10.4}", g.gap, g.bound);
        }
    }
    Ok(())
}
