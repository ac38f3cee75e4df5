//! Quantile and CDF models for the pricing kernel and the intractable claim.

mod claim;
mod kernel;
pub mod normal;

pub use claim::{Claim, DiscreteDistribution, TruncatedNormalClaim, UniformClaim};
pub use kernel::LognormalKernel;

use crate::error::{Error, Result};

/// Default clipping of probability grids away from 0 and 1.
pub const DEFAULT_EPS_P: f64 = 1e-6;

pub(crate) fn check_unit_closed(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain { what, value: p, domain: "[0, 1]" })
    }
}
