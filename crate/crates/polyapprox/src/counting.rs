//! Approximate counting polynomials.
//!
//! The upper polynomial approximates the step indicator `1{x > 1 + eps}` on
//! `[0, hi]`: it stays in [0, 1], is at most `eta` left of `1 + eps/2`, and
//! at least `1 - eta` right of `1 + eps`. It is built as
//! `(1 - eta) * p1 + eta/2` where `p1` approximates the piecewise-linear ramp
//!
//! ```text
//! f1(x) = (2/eps) ( relu(x - (1 + eps/2)) - relu(x - (1 + eps)) )
//! ```
//!
//! through the closed-form Chebyshev ReLU projection, with approximation
//! budget `||f1 - p1|| <= eta/2`. The lower polynomial mirrors it around the
//! ramp from `1 - eps` down to `1 - eps/2`. Every construction is verified on
//! a dense grid (10^4 equispaced points plus the breakpoints) before being
//! returned.

use crate::chebyshev::{shifted_relu_coeffs, Poly};
use crate::{PolyError, Result};

/// Grid resolution used by all verifications.
pub const GRID_POINTS: usize = 10_000;

/// Degree constant of the construction: degree = ceil(DEGREE_CONSTANT * hi / (eps * eta)).
pub const DEGREE_CONSTANT: f64 = 3.0;

/// Slack allowed on the range condition of the upper polynomial.
const RANGE_SLACK: f64 = 1e-9;

/// A verified counting polynomial together with its grid report.
#[derive(Debug, Clone)]
pub struct CountingPoly {
    pub poly: Poly,
    /// The degree bound ceil(DEGREE_CONSTANT * hi / (eps * eta)) it was built with.
    pub degree_bound: usize,
    pub report: GridReport,
}

/// Worst-case margins over the verification grid; all nonnegative on a pass.
#[derive(Debug, Clone, Copy)]
pub struct GridReport {
    /// min over the grid of the distance to the allowed value range.
    pub range_margin: f64,
    /// min over the flat-at-0 region of `eta - p(x)` (upper) or the
    /// flat-at-1 region of `p(x) - (1 - eta)` (lower).
    pub near_margin: f64,
    /// mirror margin on the far region.
    pub far_margin: f64,
}

fn validate(eps: f64, hi: f64, eta: f64) -> Result<()> {
    if !eps.is_finite() || eps <= 0.0 || eps >= 1.0 {
        return Err(PolyError::InvalidParameter(format!("eps = {eps} not in (0, 1)")));
    }
    if !hi.is_finite() || hi < 3.0 {
        return Err(PolyError::InvalidParameter(format!("interval end {hi} below 3")));
    }
    if !eta.is_finite() || eta <= 0.0 || eta >= 0.5 {
        return Err(PolyError::InvalidParameter(format!("eta = {eta} not in (0, 1/2)")));
    }
    Ok(())
}

fn ramp_degree(eps: f64, hi: f64, eta: f64) -> usize {
    (DEGREE_CONSTANT * hi / (eps * eta)).ceil() as usize
}

/// `(2/eps) (relu(x - b1) - relu(x - b2))` projected on `[0, hi]`.
fn ramp_poly(eps: f64, hi: f64, b1: f64, b2: f64, degree: usize) -> Result<Poly> {
    let map = |b: f64| 2.0 * b / hi - 1.0;
    let c1 = shifted_relu_coeffs(map(b1), degree);
    let c2 = shifted_relu_coeffs(map(b2), degree);
    // relu(x - b) = (hi/2) relu(t - t_b) under the affine map to [-1, 1]
    let scale = (2.0 / eps) * (hi / 2.0);
    let coeffs: Vec<f64> = c1
        .iter()
        .zip(&c2)
        .map(|(a, b)| scale * (a - b))
        .collect();
    Poly::new(0.0, hi, coeffs)
}

/// Grid: equispaced points plus explicit breakpoints, sorted.
fn verification_grid(hi: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = (0..=GRID_POINTS)
        .map(|i| hi * i as f64 / GRID_POINTS as f64)
        .collect();
    g.extend_from_slice(breakpoints);
    g.sort_by(f64::total_cmp);
    g
}

fn check(
    poly: &Poly,
    grid: &[f64],
    range: (f64, f64),
    near_end: f64,
    near_bound_is_upper: bool,
    far_start: f64,
    eta: f64,
) -> Result<GridReport> {
    let mut range_margin = f64::INFINITY;
    let mut near_margin = f64::INFINITY;
    let mut far_margin = f64::INFINITY;
    for &x in grid {
        let v = poly.eval(x);
        let rm = (v - range.0).min(range.1 - v);
        if rm < range_margin {
            range_margin = rm;
        }
        if rm < 0.0 {
            return Err(PolyError::GridViolation {
                x,
                value: v,
                condition: format!("value outside [{}, {}]", range.0, range.1),
            });
        }
        if x <= near_end {
            let m = if near_bound_is_upper { eta - v } else { v - (1.0 - eta) };
            if m < near_margin {
                near_margin = m;
            }
            if m < 0.0 {
                let cond = if near_bound_is_upper {
                    format!("exceeds eta = {eta} on the near region")
                } else {
                    format!("below 1 - eta = {} on the near region", 1.0 - eta)
                };
                return Err(PolyError::GridViolation { x, value: v, condition: cond });
            }
        }
        if x >= far_start {
            let m = if near_bound_is_upper { v - (1.0 - eta) } else { eta - v };
            if m < far_margin {
                far_margin = m;
            }
            if m < 0.0 {
                let cond = if near_bound_is_upper {
                    format!("below 1 - eta = {} on the far region", 1.0 - eta)
                } else {
                    format!("exceeds eta = {eta} on the far region")
                };
                return Err(PolyError::GridViolation { x, value: v, condition: cond });
            }
        }
    }
    Ok(GridReport {
        range_margin,
        near_margin,
        far_margin,
    })
}

/// Counting polynomial for the upper median side on `[0, hi]`:
/// (i) values in `[-1e-9, 1 + 1e-9]`; (ii) `<= eta` on `[0, 1 + eps/2]`;
/// (iii) `>= 1 - eta` on `[1 + eps, hi]`. `hi` plays the role of the norm
/// bound M and may be set to `2M` for use over an inflated range.
pub fn counting_poly_upper(eps: f64, hi: f64, eta: f64) -> Result<CountingPoly> {
    validate(eps, hi, eta)?;
    let degree = ramp_degree(eps, hi, eta);
    let b1 = 1.0 + eps / 2.0;
    let b2 = 1.0 + eps;
    let p1 = ramp_poly(eps, hi, b1, b2, degree)?;
    let poly = p1.affine(1.0 - eta, eta / 2.0);
    let grid = verification_grid(hi, &[b1, b2]);
    let report = check(
        &poly,
        &grid,
        (-RANGE_SLACK, 1.0 + RANGE_SLACK),
        b1,
        true,
        b2,
        eta,
    )?;
    Ok(CountingPoly {
        poly,
        degree_bound: degree,
        report,
    })
}

/// Mirror of [`counting_poly_upper`] for the lower median side:
/// (i) values in `[0, 1]`; (ii) `>= 1 - eta` on `[0, 1 - eps]`;
/// (iii) `<= eta` on `[1 - eps/2, hi]`.
pub fn counting_poly_lower(eps: f64, hi: f64, eta: f64) -> Result<CountingPoly> {
    validate(eps, hi, eta)?;
    let degree = ramp_degree(eps, hi, eta);
    let b1 = 1.0 - eps;
    let b2 = 1.0 - eps / 2.0;
    // r1 = 1 - ramp: 1 on [0, 1-eps], falling to 0 at 1 - eps/2
    let ramp = ramp_poly(eps, hi, b1, b2, degree)?;
    let r1 = ramp.affine(-1.0, 1.0);
    let poly = r1.affine(1.0 - eta, eta / 2.0);
    let grid = verification_grid(hi, &[b1, b2]);
    let report = check(&poly, &grid, (0.0, 1.0), b1, false, b2, eta)?;
    Ok(CountingPoly {
        poly,
        degree_bound: degree,
        report,
    })
}

/// The exact piecewise-linear target of the upper construction,
/// `(1 - eta) f1 + eta/2`, for approximation-budget checks.
pub fn upper_target(eps: f64, eta: f64, x: f64) -> f64 {
    let f1 = (2.0 / eps) * ((x - (1.0 + eps / 2.0)).max(0.0) - (x - (1.0 + eps)).max(0.0));
    (1.0 - eta) * f1 + eta / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_passes_reference_parameters() {
        let cp = counting_poly_upper(0.5, 3.0, 0.25).unwrap();
        assert_eq!(cp.degree_bound, 72); // ceil(3 * 3 / (0.5 * 0.25))
        assert_eq!(cp.poly.degree(), 72);
        assert!(cp.report.range_margin >= 0.0);
        assert!(cp.report.near_margin >= 0.0);
        assert!(cp.report.far_margin >= 0.0);
    }

    #[test]
    fn lower_passes_reference_parameters() {
        let cp = counting_poly_lower(0.5, 3.0, 0.25).unwrap();
        let r = &cp.poly;
        assert!(r.eval(0.0) >= 1.0 - 0.25);
        assert!(r.eval(3.0) <= 0.25);
    }

    #[test]
    fn upper_transition_midpoint_is_interior() {
        let eps = 0.5;
        let eta = 0.25;
        let cp = counting_poly_upper(eps, 3.0, eta).unwrap();
        let mid = 1.0 + 0.75 * eps;
        let v = cp.poly.eval(mid);
        assert!(v >= eta / 4.0 && v <= 1.0 - eta / 4.0, "midpoint value {v}");
    }

    #[test]
    fn doubling_interval_at_most_doubles_degree() {
        let a = counting_poly_upper(0.5, 3.0, 0.25).unwrap();
        let b = counting_poly_upper(0.5, 6.0, 0.25).unwrap();
        assert!(b.degree_bound <= 2 * a.degree_bound + 1);
    }

    #[test]
    fn upper_tracks_piecewise_linear_target_within_budget() {
        let (eps, eta) = (0.5, 0.25);
        let cp = counting_poly_upper(eps, 3.0, eta).unwrap();
        for i in 0..=GRID_POINTS {
            let x = 3.0 * i as f64 / GRID_POINTS as f64;
            let diff = (cp.poly.eval(x) - upper_target(eps, eta, x)).abs();
            assert!(diff <= eta / 2.0, "budget exceeded at {x}: {diff}");
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(counting_poly_upper(0.0, 3.0, 0.25).is_err());
        assert!(counting_poly_upper(0.5, 2.0, 0.25).is_err());
        assert!(counting_poly_upper(0.5, 3.0, 0.5).is_err());
        assert!(counting_poly_lower(1.0, 3.0, 0.25).is_err());
    }

    #[test]
    fn infeasible_construction_reports_witness() {
        // eta so small that the fixed degree constant cannot meet the budget
        // at a huge slope: force a failure by requesting an absurd ramp.
        // DEGREE_CONSTANT * hi / (eps*eta) stays the built degree, so feed a
        // handcrafted poly through check() instead: a constant 0.5 violates
        // the near condition.
        let poly = Poly::new(0.0, 3.0, vec![0.5]).unwrap();
        let grid = verification_grid(3.0, &[1.25, 1.5]);
        let err = check(&poly, &grid, (0.0, 1.0), 1.25, true, 1.5, 0.25).unwrap_err();
        match err {
            PolyError::GridViolation { x, value, .. } => {
                assert!(x <= 1.25);
                assert!((value - 0.5).abs() < 1e-15);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
