//! Brute-force verifiers, independent of the obstacle solver.
//!
//! * exhaustive couplings of equal-weight atoms, for the rearrangement
//!   extremes of `E[XY]` and of `E[u(X + Y)]`;
//! * a direct projected-gradient maximizer of the discretized quantile
//!   problem with the budget constraint kept explicit.

use itertools::Itertools;

use crate::distributions::{Claim, DiscreteDistribution, LognormalKernel};
use crate::error::{invalid, Error, Result};
use crate::grid::SolverGrid;
use crate::objective::{GridQuantile, RobustObjective};
use crate::solver::Discretization;

/// Largest atom count the permutation enumeration accepts.
pub const MAX_ATOMS: usize = 8;

/// Sum that does not depend on the order of its terms.
fn order_free_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Two equal-length lists of equally likely atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProblem {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl CouplingProblem {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(invalid("coupling needs two non-empty atom lists of equal length"));
        }
        if x.len() > MAX_ATOMS {
            return Err(Error::Size { n: x.len(), max: MAX_ATOMS });
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(invalid("atoms must be finite"));
        }
        let mut x = x.to_vec();
        let mut y = y.to_vec();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `E[f(X, Y)]` under the coupling `x₍ᵢ₎ ↔ y_{σ(i)}`.
    fn expectation(&self, perm: &[usize], f: impl Fn(f64, f64) -> f64) -> f64 {
        let terms = self.x.iter().zip(perm).map(|(&a, &j)| f(a, self.y[j])).collect();
        order_free_sum(terms) / self.len() as f64
    }

    fn comonotone(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    fn anticomonotone(&self) -> Vec<usize> {
        (0..self.len()).rev().collect()
    }

    /// Minimum and maximum of `E[f(X, Y)]` over all `n!` couplings.
    fn enumerate(&self, f: impl Fn(f64, f64) -> f64 + Copy) -> (f64, f64) {
        (0..self.len())
            .permutations(self.len())
            .map(|perm| self.expectation(&perm, f))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RearrangementExtremes {
    pub min: f64,
    pub max: f64,
    /// `∫ Q_X(p) Q_Y(p) dp`, the sorted-sorted pairing.
    pub comonotone: f64,
    /// `∫ Q_X(p) Q_Y(1−p) dp`, the sorted-reversed pairing.
    pub anticomonotone: f64,
}

impl RearrangementExtremes {
    pub fn attained_by_sorted_pairings(&self) -> bool {
        self.max == self.comonotone && self.min == self.anticomonotone
    }
}

pub fn rearrangement_extremes(prob: &CouplingProblem) -> RearrangementExtremes {
    let product = |a: f64, b: f64| a * b;
    let (min, max) = prob.enumerate(product);
    RearrangementExtremes {
        min,
        max,
        comonotone: prob.expectation(&prob.comonotone(), product),
        anticomonotone: prob.expectation(&prob.anticomonotone(), product),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingValue {
    /// `inf E[u(X + Y)]` over couplings.
    pub worst: f64,
    /// `sup E[u(X + Y)]` over couplings.
    pub best: f64,
    pub j_alpha: f64,
    pub worst_is_comonotone: bool,
    pub best_is_anticomonotone: bool,
}

/// `J_α` of an equal-weight wealth law by enumerating every coupling with
/// the (equal-weight, discrete) claim of `obj`.
pub fn coupling_j_alpha(obj: &RobustObjective, wealth: &[f64]) -> Result<CouplingValue> {
    let Claim::Discrete(claim) = obj.claim() else {
        return Err(Error::Unsupported("coupling enumeration needs a discrete claim"));
    };
    let n = claim.values().len();
    if claim.probabilities().iter().any(|&w| (w - 1.0 / n as f64).abs() > 1e-15) {
        return Err(invalid("coupling enumeration needs equally likely claim atoms"));
    }
    let prob = CouplingProblem::new(wealth, claim.values())?;
    let utility = obj.utility();
    let f = |a: f64, b: f64| utility.u(a + b);
    let (worst, best) = prob.enumerate(f);
    let co = prob.expectation(&prob.comonotone(), f);
    let anti = prob.expectation(&prob.anticomonotone(), f);
    let alpha = obj.alpha();
    Ok(CouplingValue {
        worst,
        best,
        j_alpha: (1.0 - alpha) * worst + alpha * best,
        worst_is_comonotone: worst == co,
        best_is_anticomonotone: best == anti,
    })
}

/// Step quantile of equally likely wealth atoms.
pub fn step_quantile(wealth: &[f64]) -> Result<DiscreteDistribution> {
    DiscreteDistribution::uniform(wealth)
}

/// Euclidean projection onto the non-decreasing cone.
pub fn pava_project(values: &[f64]) -> Vec<f64> {
    pava_project_weighted(values, &vec![1.0; values.len()])
}

/// Weighted projection `argmin Σ wᵢ (zᵢ − vᵢ)²` over non-decreasing `z`.
pub fn pava_project_weighted(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len(), "values and weights differ in length");
    // (weighted sum, total weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let mut cur = (v * w, w, 1);
        while let Some(&(s, tw, c)) = blocks.last() {
            if s / tw <= cur.0 / cur.1 {
                break;
            }
            blocks.pop();
            cur = (cur.0 + s, cur.1 + tw, cur.2 + c);
        }
        blocks.push(cur);
    }
    blocks.iter().flat_map(|&(s, w, c)| std::iter::repeat_n(s / w, c)).collect()
}

/// The quantile problem on an `M`-node grid with the budget kept explicit.
#[derive(Debug, Clone)]
pub struct DirectProblem {
    pub objective: RobustObjective,
    pub kernel: LognormalKernel,
    pub budget: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone)]
pub struct DirectSolution {
    pub quantile: GridQuantile,
    /// `Σ wᵢ V(Qᵢ, pᵢ)`.
    pub objective: f64,
    /// Multiplier implied by the final projection.
    pub lambda: f64,
    pub budget_error: f64,
    pub iterations: usize,
}

pub const DIRECT_MAX_ITERATIONS: usize = 100_000;

/// Projected gradient ascent for `max Σ wᵢ V(Qᵢ, pᵢ)` subject to `Q`
/// non-decreasing, `Q ≥ 0` and `Σ wᵢ Qᵢ Q_ρ(1−pᵢ) = x`.
///
/// Steps are scaled by `1/|∂²V/∂x²|` and projected in the matching
/// weighted norm: weighted PAVA of the shifted target, clamped at zero,
/// with the shift (the budget multiplier) found by bisection. Step length
/// backtracks from 1 until the objective increases.
pub fn direct_solve(prob: &DirectProblem) -> Result<DirectSolution> {
    if prob.grid_points < 50 {
        return Err(invalid(format!("direct solve needs at least 50 grid points, got {}", prob.grid_points)));
    }
    if !(prob.budget > 0.0 && prob.budget.is_finite()) {
        return Err(Error::Domain { what: "budget", value: prob.budget, domain: "(0, inf)" });
    }
    let grid = SolverGrid::with_points(prob.grid_points)?;
    let disc = Discretization::new(&prob.objective, &prob.kernel, grid);
    let n = grid.len();
    let w = disc.weights();
    let price: Vec<f64> = w.iter().zip(disc.kernel_reversed()).map(|(a, b)| a * b).collect();
    let x = prob.budget;

    let mut q = vec![x / price.iter().sum::<f64>(); n];
    let mut value = disc.objective_of(&q);
    let mut lambda = f64::NAN;

    for iteration in 1..=DIRECT_MAX_ITERATIONS {
        let grad: Vec<f64> = (0..n).map(|i| disc.v_x(i, q[i])).collect();
        let curv: Vec<f64> = (0..n).map(|i| (-disc.v_xx(i, q[i])).max(1e-300)).collect();
        let metric: Vec<f64> = (0..n).map(|i| w[i] * curv[i]).collect();

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..80 {
            let target: Vec<f64> = (0..n).map(|i| q[i] + step * grad[i] / curv[i]).collect();
            let (z, mu) = project_with_budget(&target, &metric, &price, x);
            let trial = disc.objective_of(&z);
            let ascent: f64 = (0..n).map(|i| w[i] * grad[i] * (z[i] - q[i])).sum();
            if trial.is_finite() && trial >= value + 1e-4 * ascent.min(0.0) && trial >= value - 1e-14 * value.abs() {
                accepted = Some((z, trial, mu / step));
                break;
            }
            step *= 0.5;
        }
        let Some((z, trial, mu)) = accepted else {
            break;
        };
        let improvement = trial - value;
        let change = z.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = 1.0 + z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        q = z;
        value = trial;
        lambda = mu;
        let budget_error = (disc.budget_of(&q) - x).abs();
        let stalled = improvement <= 1e-10 * value.abs().max(1.0) * 1e-2 || change <= 1e-10 * scale;
        if stalled && improvement < 1e-10 && budget_error < 1e-8 {
            return finish(&disc, q, value, lambda, x, iteration);
        }
    }
    let budget_error = (disc.budget_of(&q) - x).abs();
    if budget_error < 1e-8 {
        // Backtracking could not improve further: stationary to round-off.
        return finish(&disc, q, value, lambda, x, DIRECT_MAX_ITERATIONS);
    }
    Err(Error::IterationCap { iterations: DIRECT_MAX_ITERATIONS })
}

fn finish(
    disc: &Discretization,
    q: Vec<f64>,
    objective: f64,
    lambda: f64,
    x: f64,
    iterations: usize,
) -> Result<DirectSolution> {
    let budget_error = (disc.budget_of(&q) - x).abs();
    Ok(DirectSolution {
        quantile: GridQuantile::new(disc.points().to_vec(), q)?,
        objective,
        lambda,
        budget_error,
        iterations,
    })
}

/// Projection of `target` onto `{z non-decreasing, z ≥ 0, Σ cᵢ zᵢ = x}` in
/// the `metric`-weighted norm. Returns the point and the budget multiplier.
fn project_with_budget(target: &[f64], metric: &[f64], price: &[f64], x: f64) -> (Vec<f64>, f64) {
    let shifted = |mu: f64| -> Vec<f64> {
        let v: Vec<f64> = (0..target.len()).map(|i| target[i] - mu * price[i] / metric[i]).collect();
        pava_project_weighted(&v, metric).into_iter().map(|z| z.max(0.0)).collect()
    };
    let spend = |z: &[f64]| -> f64 { z.iter().zip(price).map(|(a, b)| a * b).sum() };

    // Spend is non-increasing in mu.
    let (mut lo, mut hi) = (0.0, 0.0);
    let at_zero = spend(&shifted(0.0));
    if at_zero > x {
        hi = 1.0;
        while spend(&shifted(hi)) > x {
            lo = hi;
            hi *= 4.0;
        }
    } else if at_zero < x {
        lo = -1.0;
        while spend(&shifted(lo)) < x {
            hi = lo;
            lo *= 4.0;
        }
    } else {
        return (shifted(0.0), 0.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = spend(&shifted(mid));
        if (s - x).abs() <= 1e-13 * x {
            return (shifted(mid), mid);
        }
        if s > x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    (shifted(mu), mu)
}
