use super::{check_unit_closed, normal};
use crate::error::{invalid, Error, Result};

/// Lognormal pricing kernel `ln ρ ~ N(−(r + θ²/2)T, θ²T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalKernel {
    r: f64,
    theta: f64,
    maturity: f64,
    mu_log: f64,
    sigma_log: f64,
}

impl LognormalKernel {
    pub fn new(r: f64, theta: f64, maturity: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(invalid(format!("interest rate must be finite, got {r}")));
        }
        if !theta.is_finite() || theta == 0.0 {
            return Err(invalid(format!("market price of risk must be finite and non-zero, got {theta}")));
        }
        if !(maturity.is_finite() && maturity > 0.0) {
            return Err(invalid(format!("maturity must be positive, got {maturity}")));
        }
        Ok(Self {
            r,
            theta,
            maturity,
            mu_log: -(r + 0.5 * theta * theta) * maturity,
            sigma_log: theta.abs() * maturity.sqrt(),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn mu_log(&self) -> f64 {
        self.mu_log
    }

    pub fn sigma_log(&self) -> f64 {
        self.sigma_log
    }

    /// `Q_ρ(p)`. Returns the limit 0 at `p = 0`; `p = 1` is a range error.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_unit_closed("p", p)?;
        if p == 0.0 {
            return Ok(0.0);
        }
        if p == 1.0 {
            return Err(Error::Range { what: "pricing-kernel quantile", p });
        }
        Ok(self.quantile_open(p))
    }

    /// `Q_ρ(p)` for `p` already known to lie in `(0, 1)`.
    pub(crate) fn quantile_open(&self, p: f64) -> f64 {
        (self.mu_log + self.sigma_log * normal::quantile(p)).exp()
    }

    /// `F_ρ(z)`.
    pub fn cdf(&self, z: f64) -> Result<f64> {
        Ok(normal::cdf(self.standardize(z)?))
    }

    /// `1 − F_ρ(z)`, computed without cancellation.
    pub fn sf(&self, z: f64) -> Result<f64> {
        Ok(normal::sf(self.standardize(z)?))
    }

    fn standardize(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::Domain { what: "state price", value: z, domain: "(0, inf)" });
        }
        Ok((z.ln() - self.mu_log) / self.sigma_log)
    }

    /// `E[ρ] = e^{−rT}`.
    pub fn mean(&self) -> f64 {
        (-self.r * self.maturity).exp()
    }

    /// `∫₀^q Q_ρ(s) ds = E[ρ] Φ(Φ⁻¹(q) − σ)`.
    pub fn partial_mean(&self, q: f64) -> Result<f64> {
        check_unit_closed("q", q)?;
        Ok(match q {
            0.0 => 0.0,
            1.0 => self.mean(),
            _ => self.mean() * normal::cdf(normal::quantile(q) - self.sigma_log),
        })
    }

    /// `η(p) = −∫₀^{1−p} Q_ρ(s) ds`; non-decreasing from `−E[ρ]` to 0.
    pub fn eta(&self, p: f64) -> Result<f64> {
        check_unit_closed("p", p)?;
        if p == 0.0 {
            return Ok(-self.mean());
        }
        // Upper-tail form keeps precision for p near 0.
        let z = normal::quantile(p);
        let upper = self.mean() * normal::cdf(z + self.sigma_log);
        Ok(-(self.mean() - upper))
    }
}
