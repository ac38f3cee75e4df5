//! The α-robust integrand `V(x, p)`, its derivatives, the inverse map `𝔖`,
//! the operator `𝔏`, and `J_α` evaluated on quantiles.
//!
//! For a wealth quantile `Q` the α-robust value is
//! `J_α = ∫₀¹ V(Q(p), p) dp` with
//! `V(x, p) = (1−α) u(x + Q_ϑ(p)) + α u(x + Q_ϑ(1−p))`;
//! the worst case pairs wealth comonotonically with the claim, the best
//! case anti-comonotonically.

use crate::distributions::{check_unit_closed, Claim, DiscreteDistribution};
use crate::error::{invalid, Error, Result};
use crate::grid::SolverGrid;
use crate::numerics::{solve_exp_mixture, ExpTerm};
use crate::utility::UtilitySpec;

#[derive(Debug, Clone, PartialEq)]
pub struct RobustObjective {
    alpha: f64,
    claim: Claim,
    utility: UtilitySpec,
}

impl RobustObjective {
    pub fn new(alpha: f64, claim: Claim, utility: UtilitySpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(Self { alpha, claim, utility })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn claim(&self) -> &Claim {
        &self.claim
    }

    pub fn utility(&self) -> &UtilitySpec {
        &self.utility
    }

    /// Claim quantiles `(Q_ϑ(p), Q_ϑ(1−p))`.
    fn claim_pair(&self, p: f64) -> Result<(f64, f64)> {
        check_unit_closed("p", p)?;
        Ok((self.claim.quantile_unchecked(p), self.claim.quantile_unchecked(1.0 - p)))
    }

    pub fn v(&self, x: f64, p: f64) -> Result<f64> {
        let (a, b) = self.claim_pair(p)?;
        Ok(self.v_at(x, a, b))
    }

    /// `∂ᵏV/∂xᵏ(x, p)`.
    pub fn v_x(&self, x: f64, p: f64, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(invalid("derivative order must be at least 1"));
        }
        let (a, b) = self.claim_pair(p)?;
        Ok(self.v_deriv_at(x, a, b, k))
    }

    pub(crate) fn v_at(&self, x: f64, a: f64, b: f64) -> f64 {
        self.v_deriv_at(x, a, b, 0)
    }

    /// `(1−α) u⁽ᵏ⁾(x + a) + α u⁽ᵏ⁾(x + b)`, skipping zero-weight sides.
    /// Equal claim values collapse to one term so the result is exactly
    /// independent of `α`.
    pub(crate) fn v_deriv_at(&self, x: f64, a: f64, b: f64, k: u32) -> f64 {
        if a == b {
            return self.utility.u_deriv(x + a, k);
        }
        let mut total = 0.0;
        if self.alpha < 1.0 {
            total += (1.0 - self.alpha) * self.utility.u_deriv(x + a, k);
        }
        if self.alpha > 0.0 {
            total += self.alpha * self.utility.u_deriv(x + b, k);
        }
        total
    }

    /// `∂V/∂x(·, p)` written as a mixture `Σ exp(βⱼ − γⱼ x)`.
    pub(crate) fn marginal_terms(&self, a: f64, b: f64) -> Vec<ExpTerm> {
        let mut terms = Vec::with_capacity(2 * self.utility.len());
        for (log_c, rate) in self.utility.atoms() {
            let base = log_c + rate.ln();
            if a == b {
                terms.push(ExpTerm { log_coef: base - rate * a, rate });
                continue;
            }
            if self.alpha < 1.0 {
                terms.push(ExpTerm { log_coef: (1.0 - self.alpha).ln() + base - rate * a, rate });
            }
            if self.alpha > 0.0 {
                terms.push(ExpTerm { log_coef: self.alpha.ln() + base - rate * b, rate });
            }
        }
        terms
    }

    /// `𝔖(w, p)`: the unique `ξ` with `∂V/∂x(ξ, p) = w`.
    pub fn s_inverse(&self, w: f64, p: f64) -> Result<f64> {
        check_positive_marginal(w)?;
        let (a, b) = self.claim_pair(p)?;
        Ok(self.s_inverse_at(w, a, b))
    }

    pub(crate) fn s_inverse_at(&self, w: f64, a: f64, b: f64) -> f64 {
        solve_exp_mixture(&self.marginal_terms(a, b), w.ln())
    }

    /// `𝔏(w, p) = ∂²V/∂x∂p (𝔖(w, p), p)`.
    pub fn l_operator(&self, w: f64, p: f64) -> Result<f64> {
        check_positive_marginal(w)?;
        let (a, b) = self.claim_pair(p)?;
        let da = self.claim.derivative(p)?;
        let db = self.claim.derivative(1.0 - p)?;
        let xi = self.s_inverse_at(w, a, b);
        Ok(self.cross_derivative_at(xi, a, b, da, db))
    }

    /// `∂²V/∂x∂p(x, p)` given claim values and slopes at `p` and `1−p`.
    pub(crate) fn cross_derivative_at(&self, x: f64, a: f64, b: f64, da: f64, db: f64) -> f64 {
        let mut total = 0.0;
        if self.alpha < 1.0 && da != 0.0 {
            total += (1.0 - self.alpha) * self.utility.u_deriv(x + a, 2) * da;
        }
        if self.alpha > 0.0 && db != 0.0 {
            total -= self.alpha * self.utility.u_deriv(x + b, 2) * db;
        }
        total
    }

    /// Lower bound `u(Q_ϑ(0))` of `V` and upper bound `u'(Q_ϑ(0))` of `∂V/∂x` on `x ≥ 0`.
    pub fn marginal_cap(&self) -> f64 {
        self.utility.u_deriv(self.claim.lower_bound(), 1)
    }

    /// `J_α(Q)` by composite quadrature on the default grid.
    pub fn j_alpha(&self, quantile: &GridQuantile) -> f64 {
        self.j_alpha_on(quantile, &SolverGrid::default())
    }

    pub fn j_alpha_on(&self, quantile: &GridQuantile, grid: &SolverGrid) -> f64 {
        grid.integrate(|i, p| {
            let a = self.claim.quantile_unchecked(p);
            let b = self.claim.quantile_unchecked(grid.reflected(i));
            self.v_at(quantile.eval(p), a, b)
        })
    }

    /// Exact `J_α` for a step wealth quantile against a discrete claim.
    ///
    /// Both integrand factors are piecewise constant between the merged
    /// jump levels, so the integral is a finite sum.
    pub fn j_alpha_steps(&self, wealth: &DiscreteDistribution) -> Result<f64> {
        let Claim::Discrete(claim) = &self.claim else {
            return Err(Error::Unsupported("exact J_alpha needs a discrete claim"));
        };
        if wealth.values()[0] < 0.0 {
            return Err(Error::InvariantViolation("wealth quantile takes negative values".into()));
        }
        let mut cuts: Vec<f64> = std::iter::once(0.0)
            .chain(wealth.cumulative().iter().copied())
            .chain(claim.cumulative().iter().copied())
            .chain(claim.cumulative().iter().map(|c| 1.0 - c))
            .filter(|c| (0.0..=1.0).contains(c))
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let wealth = Claim::Discrete(wealth.clone());
        let total = cuts
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let x = wealth.quantile_unchecked(mid);
                let a = self.claim.quantile_unchecked(mid);
                let b = self.claim.quantile_unchecked(1.0 - mid);
                (w[1] - w[0]) * self.v_at(x, a, b)
            })
            .sum();
        Ok(total)
    }
}

fn check_positive_marginal(w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: "marginal utility level", value: w, domain: "(0, inf)" })
    }
}

/// Piecewise-linear quantile on a probability grid, non-decreasing and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct GridQuantile {
    points: Vec<f64>,
    values: Vec<f64>,
}

const MONOTONE_SLACK: f64 = 1e-12;

impl GridQuantile {
    pub fn new(points: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() {
            return Err(invalid("grid quantile needs equally many points and values"));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) || points[0] < 0.0 || points[points.len() - 1] > 1.0 {
            return Err(invalid("grid points must increase strictly inside [0, 1]"));
        }
        for i in 0..values.len() {
            let v = values[i];
            if !v.is_finite() || v < -MONOTONE_SLACK {
                return Err(Error::InvariantViolation(format!(
                    "value {v} at p = {} is not a non-negative finite number",
                    points[i]
                )));
            }
            let floor = if i == 0 { 0.0 } else { values[i - 1] };
            if v < floor - MONOTONE_SLACK * (1.0 + floor.abs()) {
                return Err(Error::InvariantViolation(format!(
                    "quantile decreases from {floor} to {v} at p = {}",
                    points[i]
                )));
            }
            values[i] = v.max(floor);
        }
        Ok(Self { points, values })
    }

    /// Constant quantile on the given grid.
    pub fn constant(points: Vec<f64>, value: f64) -> Result<Self> {
        let values = vec![value; points.len()];
        Self::new(points, values)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation, held constant outside the grid.
    pub fn eval(&self, p: f64) -> f64 {
        let n = self.points.len();
        if p <= self.points[0] {
            return self.values[0];
        }
        if p >= self.points[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.points.partition_point(|&x| x <= p);
        let lo = hi - 1;
        let t = (p - self.points[lo]) / (self.points[hi] - self.points[lo]);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }
}
