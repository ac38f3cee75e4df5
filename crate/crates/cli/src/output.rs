//! CSV and JSON artifacts.

use std::fs;
use std::path::Path;

use serde::Serialize;

use robustq::{BudgetCheck, PayoffProfile, ResidualReport, SolveResult};

use crate::config::Config;
use crate::error::CliError;

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_solution(path: &Path, res: &SolveResult) -> Result<(), CliError> {
    let rows = (0..res.p.len()).map(|i| {
        vec![
            fmt_f64(res.p[i]),
            fmt_f64(res.q[i]),
            fmt_f64(res.h[i]),
            fmt_f64(res.lambda_eta[i]),
            fmt_f64(res.candidate[i]),
            u8::from(res.active[i]).to_string(),
        ]
    });
    write_csv(path, &["p", "Q", "H", "lambda_eta", "candidate", "active_flag"], rows)
}

pub fn write_profile(path: &Path, profile: &PayoffProfile) -> Result<(), CliError> {
    let rows = profile.rho.iter().zip(&profile.payoff).map(|(r, x)| vec![fmt_f64(*r), fmt_f64(*x)]);
    write_csv(path, &["rho", "payoff"], rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub min_gap: f64,
    pub complementarity: f64,
    pub ode: f64,
    pub monotonicity: f64,
    pub zero_region: f64,
    pub second_order: Option<f64>,
    pub tolerance: f64,
    pub ode_tolerance: f64,
    pub within_tolerance: bool,
    pub failing: Vec<&'static str>,
}

impl From<&ResidualReport> for Residuals {
    fn from(r: &ResidualReport) -> Self {
        Self {
            min_gap: r.min_gap,
            complementarity: r.complementarity,
            ode: r.ode,
            monotonicity: r.monotonicity,
            zero_region: r.zero_region,
            second_order: r.second_order,
            tolerance: r.tolerance,
            ode_tolerance: r.ode_tolerance,
            within_tolerance: r.within_tolerance(),
            failing: r.flags(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub z_score: f64,
}

impl MonteCarlo {
    pub fn new(check: &BudgetCheck, seed: u64) -> Self {
        Self { samples: check.samples, seed, mean: check.mean, std_error: check.std_error, z_score: check.z_score() }
    }
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Meta<'a> {
    pub config: &'a Config,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub lambda: Option<f64>,
    pub budget: Option<f64>,
    pub pbar: Option<f64>,
    pub degenerate: Option<bool>,
    pub mode: String,
    pub grid_points: Option<usize>,
    pub residuals: Option<Residuals>,
    pub monte_carlo: Option<MonteCarlo>,
}

impl<'a> Meta<'a> {
    pub fn solved(config: &'a Config, res: &SolveResult, monte_carlo: Option<MonteCarlo>) -> Self {
        Self {
            config,
            status: "ok",
            error: None,
            lambda: Some(res.lambda),
            budget: Some(res.budget),
            pbar: Some(res.pbar),
            degenerate: Some(res.degenerate),
            mode: res.mode.to_string(),
            grid_points: Some(res.grid.len()),
            residuals: Some(Residuals::from(&res.residuals)),
            monte_carlo,
        }
    }

    pub fn failed(config: &'a Config, status: &'static str, error: String, residuals: Option<Residuals>) -> Self {
        Self {
            config,
            status,
            error: Some(error),
            lambda: None,
            budget: None,
            pbar: None,
            degenerate: None,
            mode: robustq::SolveMode::from(config.numerics.mode).to_string(),
            grid_points: None,
            residuals,
            monte_carlo: None,
        }
    }
}
