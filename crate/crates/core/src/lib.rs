//! Optimal terminal-wealth quantiles for α-robust expected-utility
//! maximization in the presence of a claim whose dependence on the market
//! is unknown.
//!
//! The pipeline: [`objective::RobustObjective`] evaluates the law-invariant
//! integrand, [`solver`] solves the obstacle system for a given budget
//! multiplier, [`budget`] maps multipliers to endowments and back, and
//! [`payoff`] turns the optimal quantile into a payoff in the state price.
//! [`oracle`] holds brute-force cross-checks.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod distributions;
pub mod error;
pub mod grid;
mod numerics;
pub mod objective;
pub mod oracle;
pub mod payoff;
pub mod solver;
pub mod utility;

pub use budget::{lambda_of_x, x_of_lambda, BudgetCurve, BudgetSolution};
pub use distributions::{Claim, DiscreteDistribution, LognormalKernel, TruncatedNormalClaim, UniformClaim};
pub use error::{Error, Result};
pub use grid::SolverGrid;
pub use objective::{GridQuantile, RobustObjective};
pub use payoff::{default_rho_grid, distribution_check, profile, BudgetCheck, PayoffProfile};
pub use solver::{pbar, solve, Discretization, ResidualReport, SolveMode, SolveResult, SolveSettings};
pub use utility::UtilitySpec;
