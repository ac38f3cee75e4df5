//! Seeded oracle cross-checks with a JSON report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use robustq::budget::lambda_of_x;
use robustq::oracle::{
    coupling_j_alpha, direct_solve, pava_project, rearrangement_extremes, step_quantile, CouplingProblem,
    DirectProblem, MAX_ATOMS,
};
use robustq::{
    Claim, DiscreteDistribution, Discretization, LognormalKernel, RobustObjective, SolveSettings, SolverGrid,
    UtilitySpec,
};

use crate::error::CliError;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Absolute tolerance of the exact-arithmetic checks.
    pub tolerance: f64,
    /// Relative tolerance of the direct-vs-obstacle objective comparison.
    pub direct_tolerance: f64,
    pub direct_cases: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, tolerance: 1e-10, direct_tolerance: 1e-3, direct_cases: 3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub size: Option<usize>,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub tolerance: f64,
    pub direct_tolerance: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub first_failure: Option<Check>,
}

pub fn run(sizes: &[usize], opts: VerifyOptions) -> Result<VerifyReport, CliError> {
    if let Some(&n) = sizes.iter().find(|&&n| n == 0 || n > MAX_ATOMS) {
        return Err(CliError::Config(format!("sizes must lie in 1..={MAX_ATOMS}, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();

    if sizes.contains(&2) {
        checks.push(rearrangement(&[1.0, 2.0], &[0.0, 1.0], "rearrangement (canonical)"));
    }
    for &n in sizes {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..3.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        checks.push(rearrangement(&x, &y, "rearrangement"));
        checks.push(coupling(&mut rng, n, opts.tolerance)?);
    }
    checks.push(pava(&mut rng, opts.tolerance));
    for _ in 0..opts.direct_cases {
        checks.push(direct(&mut rng, opts)?);
    }

    let first_failure = checks.iter().find(|c| !c.passed).cloned();
    Ok(VerifyReport {
        seed: opts.seed,
        sizes: sizes.to_vec(),
        tolerance: opts.tolerance,
        direct_tolerance: opts.direct_tolerance,
        passed: first_failure.is_none(),
        checks,
        first_failure,
    })
}

fn rearrangement(x: &[f64], y: &[f64], name: &'static str) -> Check {
    let ext = rearrangement_extremes(&CouplingProblem::new(x, y).expect("sizes are validated"));
    Check {
        name,
        size: Some(x.len()),
        passed: ext.attained_by_sorted_pairings(),
        detail: json!({
            "x": x, "y": y,
            "max": ext.max, "min": ext.min,
            "comonotone": ext.comonotone, "anticomonotone": ext.anticomonotone,
        }),
    }
}

fn coupling(rng: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<Check, CliError> {
    let claim: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
    let wealth: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..4.0)).collect();
    let alpha = rng.random_range(0.0..=1.0);
    let obj = RobustObjective::new(
        alpha,
        Claim::Discrete(DiscreteDistribution::uniform(&claim)?),
        UtilitySpec::new(vec![0.5, 1.5], vec![0.7, 1.9])?,
    )?;
    let v = coupling_j_alpha(&obj, &wealth)?;
    let exact = obj.j_alpha_steps(&step_quantile(&wealth)?)?;
    let diff = (v.j_alpha - exact).abs();
    Ok(Check {
        name: "coupling j_alpha",
        size: Some(n),
        passed: diff < tol && v.worst_is_comonotone && v.best_is_anticomonotone,
        detail: json!({
            "alpha": alpha, "claim": claim, "wealth": wealth,
            "enumerated": v.j_alpha, "quadrature": exact, "abs_diff": diff,
            "worst_is_comonotone": v.worst_is_comonotone,
            "best_is_anticomonotone": v.best_is_anticomonotone,
        }),
    })
}

fn pava(rng: &mut ChaCha8Rng, tol: f64) -> Check {
    let v: Vec<f64> = (0..50).map(|_| rng.random_range(-5.0..5.0)).collect();
    let z = pava_project(&v);
    let monotone = z.windows(2).all(|w| w[0] <= w[1]);
    let idempotent = pava_project(&z) == z;
    let (sv, sz): (f64, f64) = (v.iter().sum(), z.iter().sum());
    let mean_diff = (sv - sz).abs() / v.len() as f64;
    Check {
        name: "pava projection",
        size: Some(v.len()),
        passed: monotone && idempotent && mean_diff < tol,
        detail: json!({ "monotone": monotone, "idempotent": idempotent, "mean_abs_diff": mean_diff }),
    }
}

fn direct(rng: &mut ChaCha8Rng, opts: VerifyOptions) -> Result<Check, CliError> {
    let alpha = rng.random_range(0.0..=1.0);
    let c = vec![rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)];
    let gamma = vec![rng.random_range(0.3..2.0), rng.random_range(0.3..2.0)];
    let y = rng.random_range(0.5..3.0);
    let x = rng.random_range(1.0..5.0);
    let obj = RobustObjective::new(alpha, Claim::uniform(y)?, UtilitySpec::new(c.clone(), gamma.clone())?)?;
    let kernel = LognormalKernel::new(0.02, 0.25, 1.0)?;
    let grid = SolverGrid::with_points(300)?;
    let vi = lambda_of_x(&obj, &kernel, x, &SolveSettings::default().with_grid(grid))?.result;
    let vi_value = Discretization::new(&obj, &kernel, vi.grid).objective_of(&vi.q);
    let d = direct_solve(&DirectProblem { objective: obj, kernel, budget: x, grid_points: grid.len() })?;
    let rel = (d.objective - vi_value).abs() / vi_value.abs();
    let sup =
        vi.p.iter()
            .zip(vi.q.iter().zip(d.quantile.values()))
            .filter(|(&p, _)| (p - vi.pbar).abs() > 0.02)
            .map(|(_, (a, b))| (a - b).abs())
            .fold(0.0, f64::max);
    Ok(Check {
        name: "direct vs obstacle solver",
        size: Some(grid.len()),
        passed: rel < opts.direct_tolerance && sup < 10.0 * opts.direct_tolerance,
        detail: json!({
            "alpha": alpha, "c": c, "gamma": gamma, "y": y, "x": x,
            "obstacle_objective": vi_value, "direct_objective": d.objective,
            "relative_diff": rel, "quantile_sup_diff": sup,
            "obstacle_lambda": vi.lambda, "direct_lambda": d.lambda,
        }),
    })
}
