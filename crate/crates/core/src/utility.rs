//! Weighted exponential utility `u(x) = −Σ cᵢ e^{−γᵢ x}`.

use crate::error::{invalid, Error, Result};
use crate::numerics::log_sum_exp;

/// Finite mixture of exponential utilities with weights `c` and rates `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilitySpec {
    weights: Vec<f64>,
    rates: Vec<f64>,
    log_weights: Vec<f64>,
}

impl UtilitySpec {
    pub fn new(weights: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != rates.len() {
            return Err(invalid(format!(
                "utility needs equally many weights and rates (got {} and {})",
                weights.len(),
                rates.len()
            )));
        }
        if weights.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(invalid("utility weights must be positive and finite"));
        }
        if rates.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(invalid("utility rates must be positive and finite"));
        }
        let log_weights = weights.iter().map(|c| c.ln()).collect();
        Ok(Self { weights, rates, log_weights })
    }

    /// Single exponential `−c e^{−γx}`.
    pub fn single(weight: f64, rate: f64) -> Result<Self> {
        Self::new(vec![weight], vec![rate])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub(crate) fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + Clone + '_ {
        self.log_weights.iter().copied().zip(self.rates.iter().copied())
    }

    /// `ln |u⁽ᵏ⁾(x)| = ln Σ cᵢ γᵢᵏ e^{−γᵢ x}`.
    pub fn log_abs_deriv(&self, x: f64, k: u32) -> f64 {
        let k = f64::from(k);
        log_sum_exp(self.atoms().map(move |(lc, g)| lc + k * g.ln() - g * x))
    }

    fn signed(k: u32, log_abs: f64) -> f64 {
        // Sign of u⁽ᵏ⁾ is (−1)^{k+1}; k = 0 is u itself (negative).
        let magnitude = log_abs.exp();
        if k % 2 == 1 {
            magnitude
        } else {
            -magnitude
        }
    }

    /// `u(x)`; saturates to `−∞` when the mixture overflows.
    pub fn u(&self, x: f64) -> f64 {
        Self::signed(0, self.log_abs_deriv(x, 0))
    }

    /// `u⁽ᵏ⁾(x) = (−1)^{k+1} Σ cᵢ γᵢᵏ e^{−γᵢ x}`; `k = 0` gives `u`.
    pub fn u_deriv(&self, x: f64, k: u32) -> f64 {
        Self::signed(k, self.log_abs_deriv(x, k))
    }

    pub fn checked_u(&self, x: f64) -> Result<f64> {
        self.checked_deriv(x, 0)
    }

    /// Like [`u_deriv`](Self::u_deriv) but reports overflow instead of saturating.
    pub fn checked_deriv(&self, x: f64, k: u32) -> Result<f64> {
        let v = self.u_deriv(x, k);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { x })
        }
    }
}
