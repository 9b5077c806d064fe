//! Experiment orchestration: seeded sweeps over `(Λ, method, seed)` that
//! reproduce the offline tables, the warm-start regret curves, the oracle
//! convergence study, and the AR(1) gap study, written out as tidy CSV with
//! metadata, a text summary, and optional SVG figures.
//!
//! Every random stream is derived from the config seed and the unit's grid
//! coordinates, so reports are identical across runs and worker counts.

pub mod ar1;
pub mod config;
pub mod metrics;
pub mod oracle;
pub mod svg;
pub mod table;
pub mod warmstart;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub use ar1::{run_ar1, Ar1EstimateRow, Ar1Report, Ar1Row};
pub use config::{ExperimentConfig, ExperimentKind, Sizes, SEED_ENV_VAR};
pub use metrics::{draw_holdout, metric_mse_v0, metric_param_err, metric_pct_wrong};
pub use oracle::{run_oracle_study, OracleCell, OracleReport, OracleRow};
pub use table::{run_table, TableCell, TableReport, TableRow};
pub use warmstart::{run_warmstart, WarmstartReport, WarmstartRow};

use crate::error::{Error, Result};

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    /// Rows recorded with an error status.
    pub failures: usize,
    /// The text written to `summary.txt`.
    pub summary: String,
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    experiment: &'a str,
    version: &'a str,
    git_hash: String,
    config_hash: String,
    seed: u64,
    workers: usize,
    failures: usize,
    started_unix: u64,
    wall_time_secs: f64,
}

/// Writes serializable rows as CSV with a header.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn git_hash() -> String {
    std::process::Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map_or_else(|| "unknown".into(), |s| s.trim().to_string())
}

/// Runs `cfg` with `workers` threads (0 means one per core) and writes
/// `config.json`, `metadata.json`, `environment.json`, `report.csv`,
/// `summary.csv`, `summary.txt`, and figures into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<RunOutcome> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    let (failures, summary) = pool.install(|| match cfg.experiment {
        ExperimentKind::Table1 | ExperimentKind::Table2 => write_table(cfg, out),
        ExperimentKind::Warmstart => write_warmstart(cfg, out),
        ExperimentKind::OracleStudy => write_oracle(cfg, out),
        ExperimentKind::Ar1Study => write_ar1(cfg, out),
    })?;
    fs::write(out.join("config.json"), cfg.to_json()?)?;
    fs::write(out.join("summary.txt"), &summary)?;
    let meta = Metadata {
        experiment: cfg.experiment.name(),
        version: env!("CARGO_PKG_VERSION"),
        git_hash: git_hash(),
        config_hash: cfg.hash()?,
        seed: cfg.seed,
        workers: pool.current_num_threads(),
        failures,
        started_unix,
        wall_time_secs: clock.elapsed().as_secs_f64(),
    };
    fs::write(out.join("metadata.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(RunOutcome {
        out_dir: out.to_path_buf(),
        failures,
        summary,
    })
}

/// Holdout states used for value histograms.
const FIGURE_STATES: usize = 20_000;

fn write_table(cfg: &ExperimentConfig, out: &Path) -> Result<(usize, String)> {
    let report = run_table(cfg)?;
    write_rows(&out.join("report.csv"), &report.rows)?;
    let cells = report.cells();
    write_rows(&out.join("summary.csv"), &cells)?;
    fs::write(out.join("environment.json"), report.env.to_json()?)?;
    fs::write(
        out.join("ground_truth.json"),
        serde_json::to_string_pretty(&report.truths)?,
    )?;
    if cfg.svg {
        let states = &report.holdout[..report.holdout.len().min(FIGURE_STATES)];
        let groups: Vec<(String, Vec<f64>)> = cfg
            .lambdas
            .iter()
            .zip(&report.first_fits)
            .filter_map(|(l, q)| {
                let q = q.as_ref()?;
                Some((format!("Λ = {l}"), states.iter().map(|s| q.max_value(0, s)).collect()))
            })
            .collect();
        let title = format!(
            "{}: orthogonal robust V̂_0 on holdout states (trial 0)",
            cfg.experiment.name()
        );
        fs::write(
            out.join("value_hist.svg"),
            svg::histogram(&title, "V̂_0(s)", &groups, 40),
        )?;
    }
    let mut s = format!(
        "{} (d = {}, n = {}, T = {}, {} trials, env seed {})\n",
        cfg.experiment.name(),
        report.env.d,
        cfg.sizes.n,
        report.env.horizon,
        cfg.trials,
        report.env.seed
    );
    let _ = writeln!(
        s,
        "{:>7}  {:<10}  {:>22}  {:>18}  {:>18}",
        "Λ", "method", "MSE(V̄*_0)", "ℓ2 param err", "% wrong action"
    );
    for c in &cells {
        let _ = writeln!(
            s,
            "{:>7}  {:<10}  {:>12.4} ± {:<7.4}  {:>8.4} ± {:<7.4}  {:>8.3} ± {:<7.3}",
            c.lambda,
            c.method,
            c.mse_v0,
            c.mse_v0_se,
            c.param_err,
            c.param_err_se,
            c.pct_wrong_action,
            c.pct_wrong_action_se
        );
    }
    append_failures(&mut s, report.failures());
    Ok((report.failures(), s))
}

fn write_warmstart(cfg: &ExperimentConfig, out: &Path) -> Result<(usize, String)> {
    let report = run_warmstart(cfg)?;
    write_rows(&out.join("report.csv"), &report.rows(cfg.trials))?;
    fs::write(out.join("environment.json"), report.env.to_json()?)?;
    #[derive(Serialize)]
    struct Row {
        method: &'static str,
        trials: usize,
        final_cum_regret: Option<f64>,
        final_cum_regret_se: Option<f64>,
        ratio_to_standard: Option<f64>,
    }
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (method, trace) in &report.traces {
        if let Ok(tr) = trace {
            tr.write_csv(&out.join(format!("regret_{method}.csv")))?;
            tr.write_summary_csv(&out.join(format!("regret_summary_{method}.csv")))?;
            series.push(svg::Series {
                name: method.to_string(),
                points: tr
                    .summary()
                    .iter()
                    .enumerate()
                    .map(|(k, e)| ((k + 1) as f64, e.mean))
                    .collect(),
            });
        }
        let fin = report.final_regret(method);
        rows.push(Row {
            method,
            trials: cfg.trials,
            final_cum_regret: fin.map(|e| e.mean),
            final_cum_regret_se: fin.map(|e| e.se),
            ratio_to_standard: report.ratio(method),
        });
    }
    write_rows(&out.join("summary.csv"), &rows)?;
    if cfg.svg {
        let chart = svg::line_chart(
            "Mean cumulative regret of LSVI-UCB",
            "episode",
            "cumulative regret",
            &series,
        );
        fs::write(out.join("regret.svg"), chart)?;
    }
    let mut s = format!(
        "warmstart (K = {}, offline episodes = {}, Λ = {}, {} trials, env seed {})\n",
        cfg.sizes.episodes, cfg.sizes.offline_episodes, report.lambda, cfg.trials, report.env.seed
    );
    let _ = writeln!(
        s,
        "optimal value estimate {:.4} (greedy rollout {:.4} ± {:.4})",
        report.optimal.fitted, report.optimal.rollout.mean, report.optimal.rollout.se
    );
    for r in &rows {
        match (r.final_cum_regret, r.final_cum_regret_se) {
            (Some(m), Some(se)) => {
                let _ = writeln!(
                    s,
                    "{:<7} cumulative regret {:>10.3} ± {:<8.3} ratio to standard {:.3}",
                    r.method,
                    m,
                    se,
                    r.ratio_to_standard.unwrap_or(f64::NAN)
                );
            }
            _ => {
                let _ = writeln!(s, "{:<7} failed", r.method);
            }
        }
    }
    let failures = report.failures(cfg.trials);
    append_failures(&mut s, failures);
    Ok((failures, s))
}

fn write_oracle(cfg: &ExperimentConfig, out: &Path) -> Result<(usize, String)> {
    let report = run_oracle_study(cfg)?;
    write_rows(&out.join("report.csv"), &report.rows)?;
    let cells = report.cells(&cfg.sizes.n_grid);
    write_rows(&out.join("summary.csv"), &cells)?;
    fs::write(out.join("environment.json"), report.env.to_json()?)?;
    fs::write(
        out.join("ground_truth.json"),
        serde_json::to_string_pretty(&report.truths)?,
    )?;
    if cfg.svg {
        let states = &report.holdout[..report.holdout.len().min(FIGURE_STATES)];
        let groups: Vec<(String, Vec<f64>)> = report
            .truths
            .iter()
            .map(|t| {
                (
                    format!("Λ = {}", t.lambda),
                    states.iter().map(|s| t.value(0, s)).collect(),
                )
            })
            .collect();
        fs::write(
            out.join("value_hist.svg"),
            svg::histogram("Robust optimal value V̄*_0 on holdout states", "V̄*_0(s)", &groups, 40),
        )?;
        let series: Vec<svg::Series> = report
            .truths
            .iter()
            .map(|t| svg::Series {
                name: format!("Λ = {}", t.lambda),
                points: cells
                    .iter()
                    .filter(|c| c.lambda == t.lambda)
                    .map(|c| ((c.n as f64).log10(), c.mse_v0))
                    .collect(),
            })
            .collect();
        fs::write(
            out.join("mse_vs_n.svg"),
            svg::line_chart("Robust FQE of the oracle policy", "log10 n", "MSE(V̄*_0)", &series),
        )?;
    }
    let mut s = format!(
        "oracle_study (d = {}, T = {}, {} trials, env seed {})\n",
        report.env.d, report.env.horizon, cfg.trials, report.env.seed
    );
    for truth in &report.truths {
        let row: Vec<String> = cells
            .iter()
            .filter(|c| c.lambda == truth.lambda)
            .map(|c| format!("n={}: {:.4} ± {:.4}", c.n, c.mse_v0, c.mse_v0_se))
            .collect();
        let _ = writeln!(s, "Λ = {:<6} {}", truth.lambda, row.join("  "));
    }
    append_failures(&mut s, report.failures());
    Ok((report.failures(), s))
}

fn write_ar1(cfg: &ExperimentConfig, out: &Path) -> Result<(usize, String)> {
    let report = run_ar1(cfg)?;
    write_rows(&out.join("report.csv"), &report.rows)?;
    write_rows(&out.join("estimates.csv"), &report.estimates)?;
    let held = report.rows.iter().filter(|r| r.within_bound).count();
    let mut s = format!(
        "ar1_study (θ_R = {}, σ_P = {}, n = {}, {} trials)\nexact gap within the log-Λ bound at {held} of {} grid points\n",
        ar1::THETA_R,
        ar1::SIGMA_P,
        cfg.sizes.n,
        cfg.trials,
        report.rows.len()
    );
    let lambda = cfg.lambdas.iter().copied().fold(f64::NAN, f64::max);
    for &theta_p in &cfg.ar1_theta_p {
        let ratios: Vec<String> = cfg
            .ar1_horizons
            .windows(2)
            .filter_map(|w| {
                let r = report.gap(theta_p, w[1], lambda)? / report.gap(theta_p, w[0], lambda)?;
                Some(format!("gap(T={})/gap(T={}) = {r:.3}", w[1], w[0]))
            })
            .collect();
        if !ratios.is_empty() {
            let _ = writeln!(s, "θ_P = {theta_p} ({}): {}", ar1::regime(theta_p), ratios.join(", "));
        }
    }
    let _ = writeln!(
        s,
        "{:>5} {:>3} {:>6} {:>10} {:>10} {:>14}",
        "θ_P", "T", "Λ", "gap", "bound", "estimate"
    );
    for r in &report.rows {
        let est: Vec<f64> = report
            .estimates
            .iter()
            .filter(|e| e.theta_p == r.theta_p && e.horizon == r.horizon && e.lambda == r.lambda)
            .filter_map(|e| e.est_gap)
            .collect();
        let e = crate::mdp::Estimate::from_samples(&est);
        let _ = writeln!(
            s,
            "{:>5} {:>3} {:>6} {:>10.4} {:>10.4} {:>7.4} ± {:.4}",
            r.theta_p, r.horizon, r.lambda, r.gap, r.bound, e.mean, e.se
        );
    }
    append_failures(&mut s, report.failures());
    Ok((report.failures(), s))
}

fn append_failures(s: &mut String, failures: usize) {
    if failures > 0 {
        let _ = writeln!(s, "{failures} rows failed; see the status column of report.csv");
    }
}
