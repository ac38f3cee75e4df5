//! Uniform probability grids clipped to `[ε, 1 − ε]`.

use crate::distributions::DEFAULT_EPS_P;
use crate::error::{invalid, Result};

/// Points `pᵢ = ε + i·(1 − 2ε)/N`, `i = 0..=N`.
///
/// Quadrature weights are trapezoidal with the two end cells stretched by
/// `ε` so that they cover all of `(0, 1)` and sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverGrid {
    intervals: usize,
    eps: f64,
}

impl SolverGrid {
    pub fn new(intervals: usize, eps: f64) -> Result<Self> {
        if intervals < 2 {
            return Err(invalid(format!("grid needs at least 2 intervals, got {intervals}")));
        }
        if !(eps > 0.0 && eps < 0.25) {
            return Err(invalid(format!("grid clipping must lie in (0, 0.25), got {eps}")));
        }
        Ok(Self { intervals, eps })
    }

    /// Grid with `points` nodes and the default clipping.
    pub fn with_points(points: usize) -> Result<Self> {
        Self::new(points.saturating_sub(1), DEFAULT_EPS_P)
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn step(&self) -> f64 {
        (1.0 - 2.0 * self.eps) / self.intervals as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.eps + i as f64 * self.step()
    }

    /// `1 − pᵢ`, taken as the mirrored node `p_{N−i}` so the grid stays symmetric.
    pub fn reflected(&self, i: usize) -> f64 {
        self.point(self.intervals - i)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.intervals {
            0.5 * self.step() + self.eps
        } else {
            self.step()
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// The grid with `factor` times as many intervals; old nodes are kept.
    pub fn refined(&self, factor: usize) -> Self {
        Self { intervals: self.intervals * factor.max(1), eps: self.eps }
    }

    /// `Σ wᵢ f(pᵢ)`.
    pub fn integrate(&self, mut f: impl FnMut(usize, f64) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weight(i) * f(i, self.point(i))).sum()
    }
}

impl Default for SolverGrid {
    fn default() -> Self {
        Self { intervals: 4000, eps: DEFAULT_EPS_P }
    }
}
