//! Closed-form sketching-dimension calculators and a Monte Carlo calibrator.
//!
//! Every universal constant in the underlying bounds is unspecified, so all
//! of them are threaded explicitly through [`ConstantSet`] with defaults of 1
//! and reported back alongside every output; [`calibrate_phi`] estimates the
//! tail-scale constants empirically. Degrees are accepted in log-space and
//! sums of exponentials are evaluated by log-sum-exp, so degrees up to and
//! beyond 10^300 are fine.

mod calculators;
mod calibrate;
mod report;
mod types;

pub use calculators::{
    fjlt_dim, median_committee_k, norming_log_card, required_phi, subgaussian_dim, tensor_phi,
    tensor_sufficient_dim, total_measurements, CommitteeBound,
};
pub use calibrate::{calibrate_phi, Calibration, CalibrationKind, CalibrationPoint};
pub use report::{budget_report, BudgetReport, CommitteeBudget, COMMITTEE_THETA};
pub use types::{ConstantSet, PhiFunction, VarietyParams};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate fit at m = {m}: {failures} failures in {trials} trials")]
    DegenerateFit { m: u64, failures: u64, trials: u64 },
}

pub type Result<T> = std::result::Result<T, BoundsError>;

/// Tolerance absorbed before taking ceilings, so outputs that are exactly
/// integral in exact arithmetic do not round up on floating-point noise.
const CEIL_SLACK: f64 = 1e-9;

pub(crate) fn ceil_at_least(x: f64, min: u64) -> u64 {
    let c = (x - CEIL_SLACK).ceil();
    if c <= min as f64 {
        min
    } else {
        c as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceiling_slack_absorbs_noise() {
        assert_eq!(ceil_at_least(32.0 + 1e-12, 1), 32);
        assert_eq!(ceil_at_least(32.0 + 1e-6, 1), 33);
        assert_eq!(ceil_at_least(-3.0, 0), 0);
        assert_eq!(ceil_at_least(0.2, 1), 1);
    }
}
