use super::{check_unit_closed, normal};
use crate::error::{invalid, Error, Result};

/// Uniform claim on `[0, y]`, quantile `y·p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformClaim {
    y: f64,
}

impl UniformClaim {
    pub fn new(y: f64) -> Result<Self> {
        if !(y.is_finite() && y > 0.0) {
            return Err(invalid(format!("uniform claim endpoint must be positive, got {y}")));
        }
        Ok(Self { y })
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

/// Normal `N(μ, σ²)` conditioned on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormalClaim {
    mu: f64,
    sigma: f64,
    a: f64,
    b: f64,
    // Standardized bounds and normalizer.
    alpha: f64,
    beta: f64,
    mass: f64,
}

impl TruncatedNormalClaim {
    pub fn new(mu: f64, sigma: f64, a: f64, b: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(invalid(format!("truncated normal location must be finite, got {mu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("truncated normal scale must be positive, got {sigma}")));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(invalid(format!("truncation bounds need finite a < b, got [{a}, {b}]")));
        }
        let alpha = (a - mu) / sigma;
        let beta = (b - mu) / sigma;
        let mass = Self::interval_mass(alpha, beta);
        if !(mass > 0.0) {
            return Err(invalid(format!("truncation interval [{a}, {b}] carries no normal mass")));
        }
        Ok(Self { mu, sigma, a, b, alpha, beta, mass })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn interval_mass(lo: f64, hi: f64) -> f64 {
        if lo > 0.0 {
            normal::sf(lo) - normal::sf(hi)
        } else {
            normal::cdf(hi) - normal::cdf(lo)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return 1.0;
        }
        let z = (x - self.mu) / self.sigma;
        (Self::interval_mass(self.alpha, z) / self.mass).clamp(0.0, 1.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        normal::pdf((x - self.mu) / self.sigma) / (self.sigma * self.mass)
    }

    /// Bisection on the truncated CDF.
    fn quantile_unchecked(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.a;
        }
        if p >= 1.0 {
            return self.b;
        }
        let (mut lo, mut hi) = (self.a, self.b);
        let width_tol = 1e-14 * (self.b - self.a);
        while hi - lo > width_tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) <= p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Finitely many atoms `(value, probability)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
    // cumulative[i] = P(X <= values[i]); last entry is exactly 1.
    cumulative: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("discrete distribution needs at least one atom"));
        }
        if atoms.iter().any(|&(v, w)| !v.is_finite() || !(w > 0.0) || !w.is_finite()) {
            return Err(invalid("atoms need finite values and positive probabilities"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("atom probabilities sum to {total}, not 1")));
        }
        let mut sorted = atoms.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let values: Vec<f64> = sorted.iter().map(|a| a.0).collect();
        let probs: Vec<f64> = sorted.iter().map(|a| a.1).collect();
        let mut cumulative: Vec<f64> = probs
            .iter()
            .scan(0.0, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        *cumulative.last_mut().expect("non-empty") = 1.0;
        Ok(Self { values, probs, cumulative })
    }

    /// Equal-weight atoms; cumulative levels are exactly `k/n`.
    pub fn uniform(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("discrete distribution needs at least one atom"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("atoms need finite values"));
        }
        let n = values.len();
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            values: sorted,
            probs: vec![1.0 / n as f64; n],
            cumulative: (1..=n).map(|k| k as f64 / n as f64).collect(),
        })
    }

    /// Sorted atom values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Cumulative levels at which the quantile jumps (last is 1).
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, w)| v * w).sum()
    }

    /// Right-continuous quantile `inf{x : F(x) > p}`; `Q(1)` is the largest atom.
    fn quantile_unchecked(&self, p: f64) -> f64 {
        let idx = self.cumulative.partition_point(|&c| c <= p);
        self.values[idx.min(self.values.len() - 1)]
    }
}

/// Law of the intractable claim.
#[derive(Debug, Clone, PartialEq)]
pub enum Claim {
    /// Degenerate claim paying a fixed amount.
    Constant(f64),
    Uniform(UniformClaim),
    TruncatedNormal(TruncatedNormalClaim),
    Discrete(DiscreteDistribution),
}

impl Claim {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(invalid(format!("constant claim must be finite, got {value}")));
        }
        Ok(Claim::Constant(value))
    }

    pub fn uniform(y: f64) -> Result<Self> {
        UniformClaim::new(y).map(Claim::Uniform)
    }

    pub fn truncated_normal(mu: f64, sigma: f64, a: f64, b: f64) -> Result<Self> {
        TruncatedNormalClaim::new(mu, sigma, a, b).map(Claim::TruncatedNormal)
    }

    /// `Q_ϑ(p)` on `[0, 1]`, endpoints by their limits.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_unit_closed("p", p)?;
        Ok(self.quantile_unchecked(p))
    }

    pub(crate) fn quantile_unchecked(&self, p: f64) -> f64 {
        match self {
            Claim::Constant(v) => *v,
            Claim::Uniform(c) => c.y * p,
            Claim::TruncatedNormal(c) => c.quantile_unchecked(p),
            Claim::Discrete(d) => d.quantile_unchecked(p),
        }
    }

    /// `Q_ϑ'(p)`; unsupported for discrete claims.
    pub fn derivative(&self, p: f64) -> Result<f64> {
        check_unit_closed("p", p)?;
        match self {
            Claim::Constant(_) => Ok(0.0),
            Claim::Uniform(c) => Ok(c.y),
            Claim::TruncatedNormal(c) => Ok(1.0 / c.pdf(c.quantile_unchecked(p))),
            Claim::Discrete(_) => Err(Error::Unsupported("quantile derivative of a discrete claim")),
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, Claim::Discrete(_))
    }

    /// `Q_ϑ(0)`, the lower end of the support.
    pub fn lower_bound(&self) -> f64 {
        self.quantile_unchecked(0.0)
    }

    pub fn upper_bound(&self) -> f64 {
        self.quantile_unchecked(1.0)
    }
}
