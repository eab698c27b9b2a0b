//! Polynomial approximation machinery behind median-sketch guarantees:
//! Chebyshev ReLU approximants with an `O(1/degree)` sup-error rate,
//! grid-verified counting polynomials that localize a median, the
//! median-of-means tail bound with a Monte Carlo validator, and a
//! finite-point certificate for committee norm matrices.

mod certify;
mod chebyshev;
mod counting;
mod mom;

pub use certify::{
    certify_median_on_points, CertificateSide, CertificateWitness, MedianCertificate,
};
pub use chebyshev::{relu_approx, shifted_relu_coeffs, Poly};
pub use counting::{
    counting_poly_lower, counting_poly_upper, upper_target, CountingPoly, GridReport,
    DEGREE_CONSTANT, GRID_POINTS,
};
pub use mom::{mom_exact_rate, mom_monte_carlo, mom_tail_bound, MomEstimate};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid verification failed at x = {x}: value {value} {condition}")]
    GridViolation {
        x: f64,
        value: f64,
        condition: String,
    },
    #[error("norm matrix entry ({row}, {col}) = {value} exceeds bound {max}")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        value: f64,
        max: f64,
    },
}

pub type Result<T> = std::result::Result<T, PolyError>;
