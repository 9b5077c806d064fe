//! Worst-case propensities of several actions need not be jointly
//! realizable by one confounder distribution.

use robustfqi::robust::{counterexample_check, realizable_assignment};

fn main() -> robustfqi::error::Result<()> {
    println!(
        "three actions, P(A) = (1/6, 1/3, 1/2), Λ = 3: unrealizable = {}",
        counterexample_check()
    );
    for (p, lambda) in [([1.0 / 3.0, 2.0 / 3.0], 3.0), ([0.5, 0.5], 2.0)] {
        println!(
            "two actions P(A) = {p:.3?}, Λ = {lambda}: {:.4?}",
            realizable_assignment(&p, lambda)?
        );
    }
    Ok(())
}
