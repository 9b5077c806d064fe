//! Runs a small table experiment programmatically and prints the summary.

use robustfqi::experiment::{run, ExperimentConfig, ExperimentKind};

fn main() -> robustfqi::error::Result<()> {
    let mut cfg = ExperimentConfig::preset(ExperimentKind::Table1);
    cfg.trials = 3;
    cfg.sizes.n = 300;
    cfg.sizes.d = Some(5);
    cfg.holdout = 5000;
    cfg.apply_seed_override()?;
    let out = std::env::temp_dir().join("robustfqi-example");
    let outcome = run(&cfg, &out, 0)?;
    print!("{}", outcome.summary);
    println!("files in {}", outcome.out_dir.display());
    Ok(())
}
