//! Solver for the obstacle system characterizing the optimal quantile:
//!
//! ```text
//! min{ Q'(p), H(p) − λη(p) } = 0,   H'(p) = ∂V/∂x(Q(p), p),
//! H(1) = 0,                         Q = 0 on (0, p̄_λ].
//! ```
//!
//! The grid problem maximizes `Σ wᵢ [V(Qᵢ, pᵢ) − λ Q_ρ(1−pᵢ) Qᵢ]` over
//! non-decreasing, non-negative `Q`. Its KKT multipliers are exactly the
//! gaps `Gᵢ = Hᵢ − ληᵢ` when `H` and `λη` are tabulated as suffix sums with
//! the same weights, so `H` and `λη` live on the left edge of each cell.
//!
//! On the active set the obstacle gives the explicit candidate
//! `𝔖(λ Q_ρ(1−p), p)`. Where the candidate decreases, the flat (ironed)
//! level of each violating run is the one that balances the first-order
//! condition over the run; pooling adjacent violators finds those runs.

use std::fmt;

use crate::distributions::LognormalKernel;
use crate::error::{Error, Result};
use crate::grid::SolverGrid;
use crate::numerics::{log_sum_exp, solve_exp_mixture, ExpTerm};
use crate::objective::{GridQuantile, RobustObjective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Explicit active-set candidate with exact ironing of decreasing runs.
    #[default]
    ActiveSet,
    /// Quadratic penalty on monotonicity violations, penalty doubled until
    /// the residuals pass. Kept as an independent cross-check.
    Penalized,
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMode::ActiveSet => "active-set",
            SolveMode::Penalized => "penalized",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub grid: SolverGrid,
    /// Obstacle and complementarity tolerance, utility units.
    pub tolerance: f64,
    /// Tolerance on `max |H' − ∂V/∂x(Q, p)|`.
    pub ode_tolerance: f64,
    pub mode: SolveMode,
    /// Retry once on a grid with four times as many intervals.
    pub refine: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            grid: SolverGrid::default(),
            tolerance: 1e-6,
            ode_tolerance: 1e-5,
            mode: SolveMode::ActiveSet,
            refine: true,
        }
    }
}

impl SolveSettings {
    pub fn with_grid(mut self, grid: SolverGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_mode(mut self, mode: SolveMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Residual diagnostics of a candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// `min (H − λη)` over the grid; negative values violate the obstacle.
    pub min_gap: f64,
    /// `Σ |H − λη| |ΔQ|`.
    pub complementarity: f64,
    /// `max |ΔH/Δp − ∂V/∂x(Q, p)|` over interior nodes.
    pub ode: f64,
    /// Largest decrease `max(Qᵢ₋₁ − Qᵢ, 0)`.
    pub monotonicity: f64,
    /// `max |Q|` over nodes with `p ≤ p̄_λ`.
    pub zero_region: f64,
    /// `max |−H'' + 𝔏(H', p)|` where `Q` is locally flat; `None` when the
    /// claim quantile has no derivative.
    pub second_order: Option<f64>,
    pub tolerance: f64,
    pub ode_tolerance: f64,
}

impl ResidualReport {
    pub fn obstacle_violation(&self) -> f64 {
        (-self.min_gap).max(0.0)
    }

    /// Names of the residual families above tolerance.
    pub fn flags(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.obstacle_violation() > self.tolerance {
            out.push("obstacle");
        }
        if self.complementarity > self.tolerance {
            out.push("complementarity");
        }
        if self.ode > self.ode_tolerance {
            out.push("ode");
        }
        if self.monotonicity > self.tolerance {
            out.push("monotonicity");
        }
        if self.zero_region > 0.0 {
            out.push("zero-region");
        }
        out
    }

    pub fn within_tolerance(&self) -> bool {
        self.flags().is_empty()
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "min gap {:.3e}, complementarity {:.3e}, ode {:.3e}, monotonicity {:.3e}, zero region {:.3e}",
            self.min_gap, self.complementarity, self.ode, self.monotonicity, self.zero_region
        )?;
        if let Some(s) = self.second_order {
            write!(f, ", second order {s:.3e}")?;
        }
        let flags = self.flags();
        if !flags.is_empty() {
            write!(f, " [failing: {}]", flags.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub grid: SolverGrid,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub h: Vec<f64>,
    pub lambda_eta: Vec<f64>,
    /// Pointwise active-set candidate `𝔖(λ Q_ρ(1−p), p)` before ironing.
    pub candidate: Vec<f64>,
    /// Nodes where the obstacle `H = λη` binds.
    pub active: Vec<bool>,
    pub lambda: f64,
    pub pbar: f64,
    /// `Σ wᵢ Qᵢ Q_ρ(1−pᵢ)`.
    pub budget: f64,
    pub residuals: ResidualReport,
    /// `p̄_λ` beyond the last node, so `Q ≡ 0`.
    pub degenerate: bool,
    pub mode: SolveMode,
}

impl SolveResult {
    pub fn quantile(&self) -> GridQuantile {
        GridQuantile::new(self.p.clone(), self.q.clone()).expect("solver output is non-decreasing and non-negative")
    }

    /// Piecewise-linear `Q̄(p)`, held constant outside the grid.
    pub fn eval(&self, p: f64) -> f64 {
        let n = self.p.len();
        if p <= self.p[0] {
            return self.q[0];
        }
        if p >= self.p[n - 1] {
            return self.q[n - 1];
        }
        let step = self.grid.step();
        let i = (((p - self.p[0]) / step).floor() as usize).min(n - 2);
        let t = ((p - self.p[i]) / step).clamp(0.0, 1.0);
        self.q[i] + t * (self.q[i + 1] - self.q[i])
    }
}

/// `p̄_λ = sup{p : λ Q_ρ(1−p) ≥ u'(Q_ϑ(0))} = 1 − F_ρ(u'(Q_ϑ(0))/λ)`.
pub fn pbar(obj: &RobustObjective, kernel: &LognormalKernel, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let threshold = obj.marginal_cap() / lambda;
    let p = if threshold.is_finite() && threshold > 0.0 {
        kernel.sf(threshold)?
    } else if threshold == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}

/// `η(p) = −∫ₚ¹ Q_ρ(1−s) ds`.
pub fn eta(kernel: &LognormalKernel, p: f64) -> Result<f64> {
    kernel.eta(p)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: "lambda", value: lambda, domain: "(0, inf)" })
    }
}

/// Grid tabulation of the claim, the kernel and the weights for one
/// objective; reused across many multipliers.
#[derive(Debug, Clone)]
pub struct Discretization {
    obj: RobustObjective,
    kernel: LognormalKernel,
    grid: SolverGrid,
    p: Vec<f64>,
    weights: Vec<f64>,
    claim_lo: Vec<f64>,
    claim_hi: Vec<f64>,
    // Q_ρ(1 − pᵢ)
    kernel_rev: Vec<f64>,
    // ln Σ over the two claim sides, per node and utility atom, with the weight folded in.
    log_stats: Vec<Vec<f64>>,
}

impl Discretization {
    pub fn new(obj: &RobustObjective, kernel: &LognormalKernel, grid: SolverGrid) -> Self {
        let n = grid.len();
        let p = grid.points();
        let weights = grid.weights();
        let claim_lo: Vec<f64> = p.iter().map(|&pi| obj.claim().quantile_unchecked(pi)).collect();
        let claim_hi: Vec<f64> = (0..n).map(|i| claim_lo[n - 1 - i]).collect();
        let kernel_rev: Vec<f64> = (0..n).map(|i| kernel.quantile_open(grid.reflected(i))).collect();
        let alpha = obj.alpha();
        let log_stats = (0..n)
            .map(|i| {
                obj.utility()
                    .atoms()
                    .map(|(_, rate)| {
                        if claim_lo[i] == claim_hi[i] {
                            return weights[i].ln() - rate * claim_lo[i];
                        }
                        let mut sides = Vec::with_capacity(2);
                        if alpha < 1.0 {
                            sides.push((1.0 - alpha).ln() - rate * claim_lo[i]);
                        }
                        if alpha > 0.0 {
                            sides.push(alpha.ln() - rate * claim_hi[i]);
                        }
                        weights[i].ln() + log_sum_exp(sides)
                    })
                    .collect()
            })
            .collect();
        Self { obj: obj.clone(), kernel: *kernel, grid, p, weights, claim_lo, claim_hi, kernel_rev, log_stats }
    }

    pub fn grid(&self) -> &SolverGrid {
        &self.grid
    }

    pub fn points(&self) -> &[f64] {
        &self.p
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Q_ρ(1 − pᵢ)` on the nodes.
    pub fn kernel_reversed(&self) -> &[f64] {
        &self.kernel_rev
    }

    pub fn objective(&self) -> &RobustObjective {
        &self.obj
    }

    pub fn kernel(&self) -> &LognormalKernel {
        &self.kernel
    }

    pub(crate) fn v_x(&self, i: usize, x: f64) -> f64 {
        self.obj.v_deriv_at(x, self.claim_lo[i], self.claim_hi[i], 1)
    }

    pub(crate) fn v_xx(&self, i: usize, x: f64) -> f64 {
        self.obj.v_deriv_at(x, self.claim_lo[i], self.claim_hi[i], 2)
    }

    pub(crate) fn v(&self, i: usize, x: f64) -> f64 {
        self.obj.v_at(x, self.claim_lo[i], self.claim_hi[i])
    }

    /// `Σ wᵢ Qᵢ Q_ρ(1−pᵢ)`.
    pub fn budget_of(&self, q: &[f64]) -> f64 {
        q.iter().zip(&self.weights).zip(&self.kernel_rev).map(|((qi, w), r)| qi * w * r).sum()
    }

    /// `Σ wᵢ V(Qᵢ, pᵢ)`.
    pub fn objective_of(&self, q: &[f64]) -> f64 {
        q.iter().enumerate().map(|(i, &qi)| self.weights[i] * self.v(i, qi)).sum()
    }

    /// Level `q` balancing `Σ_B wᵢ ∂V/∂x(q, pᵢ) = λ Σ_B wᵢ Q_ρ(1−pᵢ)`.
    fn block_level(&self, log_stats: &[f64], log_price: f64) -> f64 {
        let terms: Vec<ExpTerm> = self
            .obj
            .utility()
            .atoms()
            .zip(log_stats)
            .map(|((log_c, rate), s)| ExpTerm { log_coef: log_c + rate.ln() + s, rate })
            .collect();
        solve_exp_mixture(&terms, log_price)
    }

    pub fn pbar(&self, lambda: f64) -> Result<f64> {
        pbar(&self.obj, &self.kernel, lambda)
    }

    /// Solve at multiplier `λ` on this grid without refinement.
    pub fn solve(&self, lambda: f64, settings: &SolveSettings) -> Result<SolveResult> {
        check_lambda(lambda)?;
        let n = self.grid.len();
        let pbar = self.pbar(lambda)?;
        let first_free = self.p.partition_point(|&p| p <= pbar);
        let degenerate = first_free >= n;

        let candidate: Vec<f64> = (0..n)
            .map(|i| self.obj.s_inverse_at(lambda * self.kernel_rev[i], self.claim_lo[i], self.claim_hi[i]))
            .collect();

        let mut q = vec![0.0; n];
        if !degenerate {
            let free = match settings.mode {
                SolveMode::ActiveSet => self.ironed(lambda, first_free),
                SolveMode::Penalized => self.penalized(lambda, first_free, &candidate, settings),
            };
            q[first_free..].copy_from_slice(&free);
        }

        let (h, lambda_eta, gap) = self.tabulate(&q, lambda);
        let residuals = self.report(&q, &h, &gap, first_free, settings);
        let active = (0..n).map(|i| i >= first_free && gap[i] <= settings.tolerance).collect();
        Ok(SolveResult {
            grid: self.grid,
            p: self.p.clone(),
            budget: self.budget_of(&q),
            q,
            h,
            lambda_eta,
            candidate,
            active,
            lambda,
            pbar,
            residuals,
            degenerate,
            mode: settings.mode,
        })
    }

    /// Pool adjacent violators over nodes `first..`, clamped at zero.
    fn ironed(&self, lambda: f64, first: usize) -> Vec<f64> {
        struct Block {
            len: usize,
            log_stats: Vec<f64>,
            price: f64,
            level: f64,
        }
        let log_lambda = lambda.ln();
        let mut stack: Vec<Block> = Vec::new();
        for i in first..self.grid.len() {
            let price = self.weights[i] * self.kernel_rev[i];
            let log_stats = self.log_stats[i].clone();
            let level = self.block_level(&log_stats, log_lambda + price.ln());
            let mut block = Block { len: 1, log_stats, price, level };
            while let Some(prev) = stack.last() {
                if prev.level <= block.level {
                    break;
                }
                let prev = stack.pop().expect("checked non-empty");
                for (s, t) in block.log_stats.iter_mut().zip(&prev.log_stats) {
                    *s = log_sum_exp([*s, *t]);
                }
                block.len += prev.len;
                block.price += prev.price;
                block.level = self.block_level(&block.log_stats, log_lambda + block.price.ln());
            }
            stack.push(block);
        }
        let mut out = Vec::with_capacity(self.grid.len() - first);
        for b in &stack {
            out.extend(std::iter::repeat_n(b.level.max(0.0), b.len));
        }
        out
    }

    /// Penalty method on the free nodes, warm-started from the clamped candidate.
    fn penalized(&self, lambda: f64, first: usize, candidate: &[f64], settings: &SolveSettings) -> Vec<f64> {
        let m = self.grid.len() - first;
        let mut x: Vec<f64> = candidate[first..].iter().map(|c| c.max(0.0)).collect();
        let mut rho = 1e3;
        let mut best = running_max(&x);
        for _ in 0..64 {
            self.penalized_newton(lambda, first, &mut x, rho);
            let repaired = running_max(&x);
            let mut q = vec![0.0; self.grid.len()];
            q[first..].copy_from_slice(&repaired);
            let (h, _, gap) = self.tabulate(&q, lambda);
            best = repaired;
            if self.report(&q, &h, &gap, first, settings).within_tolerance() {
                break;
            }
            rho *= 2.0;
        }
        debug_assert_eq!(best.len(), m);
        best
    }

    /// Semismooth Newton with backtracking on
    /// `Σ wᵢ[V(xᵢ) − λ rᵢ xᵢ] − ρ/2 Σ max(0, xᵢ₋₁ − xᵢ)²` (with `x₋₁ = 0`).
    fn penalized_newton(&self, lambda: f64, first: usize, x: &mut [f64], rho: f64) {
        let m = x.len();
        let node = |k: usize| first + k;
        let value = |x: &[f64]| -> f64 {
            let mut total = 0.0;
            let mut prev = 0.0;
            for (k, &xk) in x.iter().enumerate() {
                let i = node(k);
                total += self.weights[i] * (self.v(i, xk) - lambda * self.kernel_rev[i] * xk);
                let viol = (prev - xk).max(0.0);
                total -= 0.5 * rho * viol * viol;
                prev = xk;
            }
            total
        };
        let mut current = value(x);
        for _ in 0..200 {
            // Gradient and tridiagonal Hessian of the penalized objective.
            let mut grad = vec![0.0; m];
            let mut diag = vec![0.0; m];
            let mut off = vec![0.0; m.saturating_sub(1)];
            for k in 0..m {
                let i = node(k);
                grad[k] = self.weights[i] * (self.v_x(i, x[k]) - lambda * self.kernel_rev[i]);
                diag[k] = self.weights[i] * self.v_xx(i, x[k]);
                let prev = if k == 0 { 0.0 } else { x[k - 1] };
                let viol = prev - x[k];
                if viol > 0.0 {
                    grad[k] += rho * viol;
                    diag[k] -= rho;
                    if k > 0 {
                        grad[k - 1] -= rho * viol;
                        diag[k - 1] -= rho;
                        off[k - 1] += rho;
                    }
                }
            }
            let grad_norm = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
            if grad_norm <= 1e-15 * (1.0 + current.abs()) {
                break;
            }
            // Newton direction: (−H) d = grad.
            let neg_diag: Vec<f64> = diag.iter().map(|d| -d).collect();
            let neg_off: Vec<f64> = off.iter().map(|o| -o).collect();
            let dir = solve_tridiagonal(&neg_off, &neg_diag, &neg_off, &grad);
            let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
                let v = value(&trial);
                if v.is_finite() && v >= current + 1e-4 * step * slope {
                    x.copy_from_slice(&trial);
                    let improvement = v - current;
                    current = v;
                    accepted = true;
                    if improvement <= 1e-16 * (1.0 + current.abs()) {
                        return;
                    }
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                return;
            }
        }
    }

    /// Suffix-sum tables `(H, λη, H − λη)`.
    fn tabulate(&self, q: &[f64], lambda: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = q.len();
        let mut h = vec![0.0; n];
        let mut le = vec![0.0; n];
        let mut gap = vec![0.0; n];
        let (mut sh, mut se, mut sg) = (0.0, 0.0, 0.0);
        for i in (0..n).rev() {
            let vx = self.v_x(i, q[i]);
            let price = lambda * self.kernel_rev[i];
            sh -= self.weights[i] * vx;
            se -= self.weights[i] * price;
            sg -= self.weights[i] * (vx - price);
            h[i] = sh;
            le[i] = se;
            gap[i] = sg;
        }
        (h, le, gap)
    }

    fn report(&self, q: &[f64], h: &[f64], gap: &[f64], first_free: usize, settings: &SolveSettings) -> ResidualReport {
        let n = q.len();
        let step = self.grid.step();
        let min_gap = gap.iter().copied().fold(f64::INFINITY, f64::min);
        let mut complementarity = gap[0].abs() * q[0].abs();
        let mut monotonicity: f64 = 0.0;
        for i in 1..n {
            complementarity += gap[i].abs() * (q[i] - q[i - 1]).abs();
            monotonicity = monotonicity.max(q[i - 1] - q[i]);
        }
        let ode = (1..n - 1).map(|i| ((h[i + 1] - h[i]) / step - self.v_x(i, q[i])).abs()).fold(0.0, f64::max);
        let zero_region = q[..first_free.min(n)].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let second_order = self.second_order_residual(q, step);
        ResidualReport {
            min_gap,
            complementarity,
            ode,
            monotonicity,
            zero_region,
            second_order,
            tolerance: settings.tolerance,
            ode_tolerance: settings.ode_tolerance,
        }
    }

    /// `max |−H'' + 𝔏(H', p)|` over interior nodes where `Q` is flat.
    fn second_order_residual(&self, q: &[f64], step: f64) -> Option<f64> {
        let claim = self.obj.claim();
        if !claim.is_differentiable() {
            return None;
        }
        let n = q.len();
        let mut worst: f64 = 0.0;
        // Fourth-order central differences on runs of five equal nodes.
        for i in 2..n.saturating_sub(2) {
            if q[i - 2..=i + 2].iter().any(|&v| v != q[i]) {
                continue;
            }
            let h2 = (8.0 * (self.v_x(i + 1, q[i]) - self.v_x(i - 1, q[i]))
                - (self.v_x(i + 2, q[i]) - self.v_x(i - 2, q[i])))
                / (12.0 * step);
            let h1 = self.v_x(i, q[i]);
            let (a, b) = (self.claim_lo[i], self.claim_hi[i]);
            let xi = self.obj.s_inverse_at(h1, a, b);
            let da = claim.derivative(self.p[i]).ok()?;
            let db = claim.derivative(self.grid.reflected(i)).ok()?;
            let l = self.obj.cross_derivative_at(xi, a, b, da, db);
            worst = worst.max((l - h2).abs() / l.abs().max(1.0));
        }
        Some(worst)
    }

    /// Residuals of an arbitrary quantile on this grid at multiplier `λ`.
    pub fn residuals(&self, q: &[f64], lambda: f64, settings: &SolveSettings) -> Result<ResidualReport> {
        check_lambda(lambda)?;
        if q.len() != self.grid.len() {
            return Err(crate::error::invalid(format!(
                "quantile has {} values for a {}-node grid",
                q.len(),
                self.grid.len()
            )));
        }
        let first_free = self.p.partition_point(|&p| p <= self.pbar(lambda).unwrap_or(0.0));
        let (h, _, gap) = self.tabulate(q, lambda);
        Ok(self.report(q, &h, &gap, first_free, settings))
    }
}

fn running_max(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut level = 0.0f64;
    for &v in x {
        level = level.max(v);
        out.push(level);
    }
    out
}

/// Thomas algorithm for a symmetric positive-definite tridiagonal system.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Solve at multiplier `λ`, refining the grid once if the residuals fail.
pub fn solve(
    obj: &RobustObjective,
    kernel: &LognormalKernel,
    lambda: f64,
    settings: &SolveSettings,
) -> Result<SolveResult> {
    let disc = Discretization::new(obj, kernel, settings.grid);
    solve_with(&disc, lambda, settings)
}

/// Like [`solve`] but reuses a tabulated grid.
pub fn solve_with(disc: &Discretization, lambda: f64, settings: &SolveSettings) -> Result<SolveResult> {
    let result = disc.solve(lambda, settings)?;
    if result.residuals.within_tolerance() {
        return Ok(result);
    }
    if settings.refine {
        let finer = Discretization::new(disc.objective(), disc.kernel(), disc.grid().refined(4));
        let retry = finer.solve(lambda, settings)?;
        if retry.residuals.within_tolerance() {
            return Ok(retry);
        }
        return Err(Error::NonConvergence { report: Box::new(retry.residuals) });
    }
    Err(Error::NonConvergence { report: Box::new(result.residuals) })
}

/// Residual report for a given quantile on `settings.grid`.
pub fn residuals(
    obj: &RobustObjective,
    kernel: &LognormalKernel,
    lambda: f64,
    q: &[f64],
    settings: &SolveSettings,
) -> Result<ResidualReport> {
    Discretization::new(obj, kernel, settings.grid).residuals(q, lambda, settings)
}
