use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use robustq::budget::{lambda_of_x, BudgetCurve};
use robustq::{default_rho_grid, distribution_check, profile, solve, Error, LognormalKernel, SolveResult};

use crate::config::{Config, Model, Target};
use crate::error::CliError;
use crate::output::{fmt_f64, write_csv, write_json, write_profile, write_solution, Meta, MonteCarlo, Residuals};

/// Solve at the configured endowment or multiplier.
pub fn solve_model(model: &Model) -> Result<SolveResult, Error> {
    match model.target {
        Target::Endowment(x) => Ok(lambda_of_x(&model.objective, &model.kernel, x, &model.settings)?.result),
        Target::Multiplier(lambda) => solve(&model.objective, &model.kernel, lambda, &model.settings),
    }
}

pub fn run_solve(config: &Config, out: &Path, seed: u64) -> Result<(), CliError> {
    let model = config.model()?;
    let meta_path = out.join("meta.json");
    let res = match solve_model(&model) {
        Ok(res) => res,
        Err(e) => {
            let residuals = match &e {
                Error::NonConvergence { report } => Some(Residuals::from(report.as_ref())),
                _ => None,
            };
            let err = CliError::from(e);
            let status = if err.exit_code() == 3 { "non-convergence" } else { "error" };
            write_json(&meta_path, &Meta::failed(config, status, err.to_string(), residuals))?;
            return Err(err);
        }
    };
    write_solution(&out.join("solution.csv"), &res)?;
    let rho = default_rho_grid(&model.kernel, config.numerics.rho_points);
    write_profile(&out.join("profile.csv"), &profile(&res, &model.kernel, &rho)?)?;
    let mc = match config.numerics.mc_samples {
        0 => None,
        n => Some(MonteCarlo::new(&distribution_check(&res, &model.kernel, n, seed)?, seed)),
    };
    write_json(&meta_path, &Meta::solved(config, &res, mc))?;
    Ok(())
}

/// `NAME=v1,v2,...`
pub fn parse_sweep(spec: &str) -> Result<(String, Vec<String>), CliError> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--sweep expects NAME=v1,v2,..., got {spec:?}")))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if name.trim().is_empty() || values.is_empty() {
        return Err(CliError::Config(format!("--sweep expects NAME=v1,v2,..., got {spec:?}")));
    }
    Ok((name.trim().to_string(), values))
}

/// Canonical spelling of a sweep value: each number in shortest
/// round-trip form, pairs joined by `:`.
fn canonical_value(value: &str) -> String {
    value
        .split(':')
        .map(|v| v.trim().parse::<f64>().map(fmt_f64).unwrap_or_else(|_| v.trim().to_string()))
        .collect::<Vec<_>>()
        .join(":")
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    value: String,
    file: Option<String>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    lambda: Option<f64>,
    budget: Option<f64>,
    pbar: Option<f64>,
    residuals: Option<Residuals>,
    config: Option<Config>,
}

#[derive(Debug, Serialize)]
struct SweepIndex<'a> {
    parameter: &'a str,
    base_config: &'a Config,
    entries: Vec<SweepEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kernel_quantiles: Option<String>,
}

pub fn run_sweep(config: &Config, spec: &str, out: &Path) -> Result<(), CliError> {
    let (name, raw) = parse_sweep(spec)?;
    // Reject unknown parameter names before running anything.
    config.with_parameter(&name, &raw[0])?;
    let values: Vec<String> = raw.iter().map(|v| canonical_value(v)).collect();

    let entries: Vec<SweepEntry> = values.par_iter().map(|value| sweep_one(config, &name, value, out)).collect();

    let kernel_quantiles = if name == "theta" {
        let thetas: Vec<f64> = entries.iter().filter_map(|e| e.config.as_ref().map(|c| c.market.theta)).collect();
        let file = "kernel_quantile.csv";
        write_kernel_quantiles(&out.join(file), config, &thetas, 999)?;
        Some(file.to_string())
    } else {
        None
    };
    let failures = entries.iter().filter(|e| e.status != "ok").count();
    write_json(
        &out.join("index.json"),
        &SweepIndex { parameter: &name, base_config: config, entries, kernel_quantiles },
    )?;
    if failures > 0 {
        return Err(CliError::NonConvergence(format!(
            "{failures} of {} sweep values failed; see index.json",
            values.len()
        )));
    }
    Ok(())
}

fn sweep_one(base: &Config, name: &str, value: &str, out: &Path) -> SweepEntry {
    let mut entry = SweepEntry {
        value: value.to_string(),
        file: None,
        status: "error",
        error: None,
        lambda: None,
        budget: None,
        pbar: None,
        residuals: None,
        config: None,
    };
    let result = (|| -> Result<(), CliError> {
        let config = base.with_parameter(name, value)?;
        entry.config = Some(config.clone());
        let model = config.model()?;
        let res = solve_model(&model).map_err(|e| {
            if let Error::NonConvergence { report } = &e {
                entry.residuals = Some(Residuals::from(report.as_ref()));
            }
            CliError::from(e)
        })?;
        let file = format!("sweep_{name}={value}.csv");
        let rho = default_rho_grid(&model.kernel, config.numerics.rho_points);
        write_profile(&out.join(&file), &profile(&res, &model.kernel, &rho)?)?;
        entry.file = Some(file);
        entry.lambda = Some(res.lambda);
        entry.budget = Some(res.budget);
        entry.pbar = Some(res.pbar);
        entry.residuals = Some(Residuals::from(&res.residuals));
        Ok(())
    })();
    match result {
        Ok(()) => entry.status = "ok",
        Err(e) => {
            entry.status = if e.exit_code() == 3 { "non-convergence" } else { "error" };
            entry.error = Some(e.to_string());
        }
    }
    entry
}

pub enum CurveGrid {
    Lambdas(Vec<f64>),
    Endowments(Vec<f64>),
    /// Log-spaced multipliers spanning a decade around the configured one.
    Around {
        points: usize,
    },
}

pub fn run_budget_curve(config: &Config, grid: CurveGrid, out: &Path) -> Result<(), CliError> {
    let model = config.model()?;
    let (obj, kernel, settings) = (&model.objective, &model.kernel, &model.settings);
    let lambdas = match grid {
        CurveGrid::Lambdas(l) => l,
        CurveGrid::Around { points } => {
            let center = match model.target {
                Target::Multiplier(l) => l,
                Target::Endowment(x) => lambda_of_x(obj, kernel, x, settings)?.lambda,
            };
            let n = points.max(1);
            (0..n)
                .map(|i| {
                    let t = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
                    center * 10f64.powf(t - 0.5)
                })
                .collect()
        }
        CurveGrid::Endowments(xs) => {
            let mut rows: Vec<(f64, f64)> = xs
                .par_iter()
                .filter_map(|&x| match lambda_of_x(obj, kernel, x, settings) {
                    Ok(sol) => Some((sol.lambda, sol.result.budget)),
                    Err(e) => {
                        eprintln!("warning: x = {x}: {e}; row omitted");
                        None
                    }
                })
                .collect();
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            return write_curve(&out.join("curve.csv"), &rows);
        }
    };
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(CliError::Config(format!("multipliers must be positive, got {bad}")));
    }
    let curve = BudgetCurve::sample(obj, kernel, &lambdas, settings);
    for (lambda, x) in &curve.points {
        if let Err(e) = x {
            eprintln!("warning: lambda = {lambda}: {e}; row omitted");
        }
    }
    if !curve.is_strictly_decreasing() {
        eprintln!("warning: sampled x(lambda) is not strictly decreasing");
    }
    write_curve(&out.join("curve.csv"), &curve.values())
}

fn write_curve(path: &Path, rows: &[(f64, f64)]) -> Result<(), CliError> {
    write_csv(path, &["lambda", "x"], rows.iter().map(|(l, x)| vec![fmt_f64(*l), fmt_f64(*x)]))
}

/// `theta, p, quantile` rows on the open grid `p = i/(points+1)`.
pub fn write_kernel_quantiles(path: &Path, config: &Config, thetas: &[f64], points: usize) -> Result<(), CliError> {
    let m = &config.market;
    let mut rows = Vec::with_capacity(thetas.len() * points);
    for &theta in thetas {
        let k = LognormalKernel::new(m.r, theta, m.maturity)
            .map_err(|e| CliError::Config(format!("theta = {theta}: {e}")))?;
        for i in 1..=points {
            let p = i as f64 / (points + 1) as f64;
            rows.push(vec![fmt_f64(theta), fmt_f64(p), fmt_f64(k.quantile(p)?)]);
        }
    }
    write_csv(path, &["theta", "p", "quantile"], rows)
}
