//! Terminal payoff `X̄ = Q̄(1 − F_ρ(ρ))` over a grid of state prices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::LognormalKernel;
use crate::error::{invalid, Error, Result};
use crate::solver::SolveResult;

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffProfile {
    pub rho: Vec<f64>,
    pub payoff: Vec<f64>,
}

impl PayoffProfile {
    pub fn is_non_increasing(&self) -> bool {
        self.payoff.windows(2).all(|w| w[1] <= w[0])
    }
}

/// `points` log-spaced state prices between `Q_ρ(0.001)` and `Q_ρ(0.999)`.
pub fn default_rho_grid(kernel: &LognormalKernel, points: usize) -> Vec<f64> {
    let lo = kernel.quantile_open(0.001).ln();
    let hi = kernel.quantile_open(0.999).ln();
    let n = points.max(2);
    (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn profile(result: &SolveResult, kernel: &LognormalKernel, rho_grid: &[f64]) -> Result<PayoffProfile> {
    let payoff = rho_grid
        .iter()
        .map(|&rho| {
            let p = kernel.sf(rho)?;
            Ok(if p <= result.pbar { 0.0 } else { result.eval(p) })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(PayoffProfile { rho: rho_grid.to_vec(), payoff })
}

/// Monte Carlo estimate of `E[ρ X̄]` against the quadrature budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetCheck {
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
    pub quadrature: f64,
}

impl BudgetCheck {
    /// `|mean − quadrature|` in standard errors (0 when both vanish).
    pub fn z_score(&self) -> f64 {
        let diff = (self.mean - self.quadrature).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

/// Samples `U ~ Uniform(0, 1)` and pairs `X̄ = Q̄(U)` with `ρ = Q_ρ(1 − U)`.
pub fn distribution_check(
    result: &SolveResult,
    kernel: &LognormalKernel,
    samples: usize,
    seed: u64,
) -> Result<BudgetCheck> {
    if samples < 2 {
        return Err(invalid("Monte Carlo check needs at least two samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let u: f64 = rng.random();
        let x = if u <= result.pbar { 0.0 } else { result.eval(u) };
        let value = if x == 0.0 {
            0.0
        } else {
            match kernel.quantile(1.0 - u) {
                Ok(rho) => rho * x,
                Err(Error::Range { .. }) => 0.0,
                Err(e) => return Err(e),
            }
        };
        sum += value;
        sum_sq += value * value;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(BudgetCheck { samples, mean, std_error: (var / n).sqrt(), quadrature: result.budget })
}
