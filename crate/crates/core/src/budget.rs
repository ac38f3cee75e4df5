//! Budget functional `x(λ) = ∫ Q̄_λ(p) Q_ρ(1−p) dp` and its inverse.

use rayon::prelude::*;

use crate::distributions::LognormalKernel;
use crate::error::{Error, Result};
use crate::objective::RobustObjective;
use crate::solver::{solve_with, Discretization, SolveResult, SolveSettings};

/// Realized budget of the optimal quantile at multiplier `λ`.
pub fn x_of_lambda(
    obj: &RobustObjective,
    kernel: &LognormalKernel,
    lambda: f64,
    settings: &SolveSettings,
) -> Result<f64> {
    let disc = Discretization::new(obj, kernel, settings.grid);
    Ok(solve_with(&disc, lambda, settings)?.budget)
}

#[derive(Debug, Clone)]
pub struct BudgetSolution {
    pub lambda: f64,
    pub result: SolveResult,
    pub iterations: usize,
}

/// Relative accuracy of the bisection on `λ`.
pub const BUDGET_RTOL: f64 = 1e-8;

/// Multiplier whose optimal quantile spends exactly `x`.
///
/// Bisection in `ln λ`, starting from `[1e−6, 1e6]·u'(Q_ϑ(0))` and widening
/// by factors of 10³ until the target is bracketed.
pub fn lambda_of_x(
    obj: &RobustObjective,
    kernel: &LognormalKernel,
    x: f64,
    settings: &SolveSettings,
) -> Result<BudgetSolution> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain { what: "budget", value: x, domain: "(0, inf)" });
    }
    let disc = Discretization::new(obj, kernel, settings.grid);
    let eval = |lambda: f64| solve_with(&disc, lambda, settings);
    let tol = BUDGET_RTOL * x;
    let cap = obj.marginal_cap();

    let mut lo = 1e-6 * cap;
    let mut lo_res = eval(lo)?;
    let mut widen = 0;
    while lo_res.budget < x {
        widen += 1;
        if widen > 30 {
            return Err(Error::UnattainableBudget {
                x,
                reason: format!("x({lo:e}) = {} is still below the target", lo_res.budget),
            });
        }
        lo *= 1e-3;
        lo_res = eval(lo)?;
    }
    let mut hi = 1e6 * cap;
    let mut hi_res = eval(hi)?;
    let mut widen = 0;
    while hi_res.budget > x {
        widen += 1;
        if widen > 30 {
            return Err(Error::UnattainableBudget {
                x,
                reason: format!("x({hi:e}) = {} is still above the target", hi_res.budget),
            });
        }
        hi *= 1e3;
        hi_res = eval(hi)?;
    }

    for (lambda, res) in [(lo, &lo_res), (hi, &hi_res)] {
        if (res.budget - x).abs() <= tol {
            return Ok(BudgetSolution { lambda, result: res.clone(), iterations: 0 });
        }
    }
    let mut best = if (lo_res.budget - x).abs() < (hi_res.budget - x).abs() { (lo, lo_res) } else { (hi, hi_res) };
    for iteration in 1..=400 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        let res = eval(mid)?;
        let err = res.budget - x;
        if err.abs() < (best.1.budget - x).abs() {
            best = (mid, res.clone());
        }
        if err.abs() <= tol {
            return Ok(BudgetSolution { lambda: mid, result: res, iterations: iteration });
        }
        // x(λ) decreases in λ.
        if err > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (best.1.budget - x).abs() <= 1e-6 * x.max(1.0) {
        return Ok(BudgetSolution { lambda: best.0, result: best.1, iterations: 400 });
    }
    Err(Error::UnattainableBudget { x, reason: format!("bisection stalled at x = {}", best.1.budget) })
}

/// Sampled `(λ, x(λ))` pairs sorted by `λ`; failed solves are kept as `Err`.
#[derive(Debug, Clone)]
pub struct BudgetCurve {
    pub points: Vec<(f64, Result<f64>)>,
}

impl BudgetCurve {
    pub fn sample(obj: &RobustObjective, kernel: &LognormalKernel, lambdas: &[f64], settings: &SolveSettings) -> Self {
        let disc = Discretization::new(obj, kernel, settings.grid);
        let mut sorted = lambdas.to_vec();
        sorted.sort_by(f64::total_cmp);
        let points =
            sorted.par_iter().map(|&lambda| (lambda, solve_with(&disc, lambda, settings).map(|r| r.budget))).collect();
        Self { points }
    }

    /// Successful samples only.
    pub fn values(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(|(l, x)| x.as_ref().ok().map(|x| (*l, *x))).collect()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.values().windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1)
    }
}
