//! The robust Bellman target on one sample: the sorting LP, the closed-form
//! plugin pseudo-outcome, and the orthogonalized pseudo-outcome.

use robustfqi::mdp::SensitivityModel;
use robustfqi::robust::{empirical_quantile, lp_oracle, msm_bound_pair, orthogonal_targets, plugin_targets, Bound};

fn main() -> robustfqi::error::Result<()> {
    let y = [3.1, -0.4, 2.2, 0.9, 5.0, 1.7, -1.3, 2.8, 0.2, 4.1];
    let n = y.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("sample mean {:.4}", mean(&y));
    for lambda in [1.0, 2.0, 4.0] {
        let model = SensitivityModel::odds_ratio(lambda)?;
        let (alpha, beta) = msm_bound_pair(0.5, &model)?;
        let tau = model.tau();
        let lp = lp_oracle(&y, alpha, beta)?;
        for bound in [Bound::Lower, Bound::Upper] {
            let z = vec![empirical_quantile(&y, bound.quantile_level(tau)); n];
            let a = vec![alpha; n];
            let plugin = mean(&plugin_targets(&y, &z, &a, tau, bound)?);
            let orth = mean(&orthogonal_targets(&y, &z, &a, tau, bound)?);
            println!("Λ = {lambda}: {bound:?} plugin {plugin:.4}, orthogonal {orth:.4}");
        }
        println!(
            "Λ = {lambda}: LP lower value {:.4}, weights in [{alpha:.3}, {beta:.3}]",
            lp.value
        );
    }
    Ok(())
}
