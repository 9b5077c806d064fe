use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::fqi::{nominal_fqi, robust_fqi, BehaviorPolicy, FqiConfig};
use crate::seeding::derive_seed;
use crate::sim::{ar1_robust_gap, Ar1Env};

/// Exact gap and log-`Λ` bound at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ar1Row {
    pub theta_p: f64,
    pub horizon: usize,
    pub lambda: f64,
    pub gap: f64,
    pub bound: f64,
    pub within_bound: bool,
}

/// Gap estimated from data by nominal minus robust FQI at `s = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ar1EstimateRow {
    pub theta_p: f64,
    pub horizon: usize,
    pub lambda: f64,
    pub trial: usize,
    pub seed: u64,
    pub exact_gap: f64,
    pub est_gap: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct Ar1Report {
    pub rows: Vec<Ar1Row>,
    pub estimates: Vec<Ar1EstimateRow>,
}

pub const THETA_R: f64 = 1.0;
pub const SIGMA_P: f64 = 1.0;

impl Ar1Report {
    pub fn failures(&self) -> usize {
        self.estimates.iter().filter(|r| r.status != "ok").count()
    }

    pub fn gap(&self, theta_p: f64, horizon: usize, lambda: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.theta_p == theta_p && r.horizon == horizon && r.lambda == lambda)
            .map(|r| r.gap)
    }
}

/// Growth regime of the gap in `T` for a given `θ_P`.
pub fn regime(theta_p: f64) -> &'static str {
    if theta_p < 1.0 {
        "linear"
    } else if theta_p == 1.0 {
        "quadratic"
    } else {
        "exponential"
    }
}

pub fn run_ar1(cfg: &ExperimentConfig) -> Result<Ar1Report> {
    let mut rows = Vec::new();
    let mut units = Vec::new();
    for &theta_p in &cfg.ar1_theta_p {
        for &horizon in &cfg.ar1_horizons {
            for &lambda in &cfg.lambdas {
                let g = ar1_robust_gap(theta_p, THETA_R, SIGMA_P, horizon, lambda)?;
                rows.push(Ar1Row {
                    theta_p,
                    horizon,
                    lambda,
                    gap: g.gap,
                    bound: g.bound,
                    within_bound: g.gap <= g.bound,
                });
                units.extend((0..cfg.trials).map(|trial| (theta_p, horizon, lambda, g.gap, trial)));
            }
        }
    }
    let estimates = units
        .into_par_iter()
        .map(|(theta_p, horizon, lambda, exact_gap, trial)| {
            let seed = derive_seed(
                cfg.seed,
                &[trial as u64, theta_p.to_bits(), horizon as u64, lambda.to_bits()],
            );
            let env = Ar1Env {
                theta_p,
                theta_r: THETA_R,
                sigma_p: SIGMA_P,
                horizon,
                init_std: 1.0,
            };
            let fqi = FqiConfig {
                behavior_policy: BehaviorPolicy::Known(vec![0.5, 0.5]),
                seed,
                ..FqiConfig::default()
            };
            let est = env.sample(cfg.sizes.n, seed).and_then(|ds| {
                let nominal = nominal_fqi(&ds, &fqi)?;
                let robust = robust_fqi(&ds, &fqi.clone().with_lambda(lambda))?;
                Ok(nominal.q.max_value(0, &[0.0]) - robust.q.max_value(0, &[0.0]))
            });
            let (est_gap, status) = match est {
                Ok(g) => (Some(g), "ok".to_string()),
                Err(e) => (None, format!("error: {e}")),
            };
            Ar1EstimateRow {
                theta_p,
                horizon,
                lambda,
                trial,
                seed,
                exact_gap,
                est_gap,
                status,
            }
        })
        .collect();
    Ok(Ar1Report { rows, estimates })
}
