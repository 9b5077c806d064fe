//! Closed-form robust backup for Gaussian outcomes and the constant `C(Λ)`.

use robustfqi::robust::{c_lambda, gaussian_robust_target};

fn main() -> robustfqi::error::Result<()> {
    println!("{:>6} {:>8} {:>10} {:>16}", "Λ", "C(Λ)", "log(Λ)/8", "robust E[N(1,4)]");
    for lambda in [1.0, 1.5, 2.0, 5.0, 10.0, 15.0, 50.0] {
        println!(
            "{lambda:>6} {:>8.4} {:>10.4} {:>16.4}",
            c_lambda(lambda)?,
            lambda.ln() / 8.0,
            gaussian_robust_target(1.0, 2.0, 0.5, lambda)?
        );
    }
    Ok(())
}
