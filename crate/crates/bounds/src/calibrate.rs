//! Monte Carlo calibration of tail-function constants.
//!
//! The theory never pins its universal constants numerically, so this
//! estimates them empirically: for each grid dimension m, run seeded trials of the
//! chosen ensemble on a fixed unit point, record the failure rate of the
//! event `| ||Sx||^2 - 1 | > eps`, and regress `-log(rate)` against `m`.
//!
//! Two results come out:
//!
//! - a free log-log regression exponent, as a diagnostic of the tail order;
//! - a conservative scale for the theory-shaped tail `c * m^{alpha0}`
//!   (`alpha0` = 1 for sub-Gaussian, `1/d` for order-d tensor sketches),
//!   fitted at the 10th percentile of the per-point ratios so the fitted
//!   tail under-estimates the observed `-log(rate)` on at least 90% of the
//!   grid. Under-estimating the tail exponent over-estimates required
//!   dimensions, which keeps calibrated budgets sufficient.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sketch_ops::seed::derive_seed;
use sketch_ops::{make_gaussian, make_khatri_rao, RowDistribution};
use tensor_core::{CpTensor, DenseVector};

use crate::{BoundsError, Result};

/// Stream label for calibration trials.
const ROLE_CALIBRATION: u64 = 0x06;

/// Ambient mode length used for the fixed calibration points.
const CAL_MODE_LEN: usize = 4;
const CAL_GAUSSIAN_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CalibrationKind {
    Gaussian,
    KhatriRao { order: u32 },
}

impl CalibrationKind {
    pub fn theory_exponent(&self) -> f64 {
        match self {
            CalibrationKind::Gaussian => 1.0,
            CalibrationKind::KhatriRao { order } => 1.0 / *order as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub m: u64,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub neg_log_rate: f64,
    /// 99% normal-approximation interval for neg_log_rate.
    pub neg_log_lo: f64,
    pub neg_log_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub kind: CalibrationKind,
    pub eps: f64,
    pub points: Vec<CalibrationPoint>,
    pub theory_exponent: f64,
    /// Free slope of log(-log rate) against log m.
    pub fitted_exponent: f64,
    pub fitted_exponent_stderr: f64,
    /// Conservative scale c of phi(m) = c m^{theory_exponent}.
    pub conservative_scale: f64,
    /// Fraction of grid points with c m^{alpha0} <= -log(rate); at least 0.9.
    pub coverage: f64,
}

/// Failure indicator of one trial at dimension m.
fn trial_fails(kind: CalibrationKind, eps: f64, m: u64, seed: u64) -> bool {
    let norm_sq = match kind {
        CalibrationKind::Gaussian => {
            let op = make_gaussian(m as usize, CAL_GAUSSIAN_N, seed).expect("valid dims");
            let mut x = vec![0.0; CAL_GAUSSIAN_N];
            x[0] = 1.0;
            op.apply_dense(&DenseVector::new(x)).expect("shape ok").norm_sq()
        }
        CalibrationKind::KhatriRao { order } => {
            let modes = vec![CAL_MODE_LEN; order as usize];
            let op = make_khatri_rao(m as usize, &modes, RowDistribution::Gaussian, seed)
                .expect("valid dims");
            // spiky rank-1 point: e_1 in every mode (the heavy-tail direction)
            let factors: Vec<Vec<f64>> = modes
                .iter()
                .map(|&n| {
                    let mut col = vec![0.0; n];
                    col[0] = 1.0;
                    col
                })
                .collect();
            let t = CpTensor::new(modes, 1, factors).expect("valid tensor");
            op.apply_cp(&t).expect("shape ok").norm_sq()
        }
    };
    (norm_sq - 1.0).abs() > eps
}

/// Runs the calibration experiment. Deterministic given `seed`; trials are
/// parallel with per-(grid, trial) derived seeds. Errors if any grid point is
/// degenerate (no failures, or nothing but failures) since `-log(rate)` is
/// then uninformative.
pub fn calibrate_phi(
    kind: CalibrationKind,
    eps: f64,
    m_grid: &[u64],
    trials: u64,
    seed: u64,
) -> Result<Calibration> {
    if m_grid.is_empty() {
        return Err(BoundsError::InvalidParameter("empty m grid".into()));
    }
    if trials < 1000 {
        return Err(BoundsError::InvalidParameter(format!(
            "need at least 1000 trials per grid point, got {trials}"
        )));
    }
    if !eps.is_finite() || eps <= 0.0 || eps >= 1.0 {
        return Err(BoundsError::InvalidParameter(format!(
            "eps = {eps} not in (0, 1)"
        )));
    }
    if m_grid.contains(&0) {
        return Err(BoundsError::InvalidParameter("grid contains m = 0".into()));
    }

    let mut points = Vec::with_capacity(m_grid.len());
    for (gi, &m) in m_grid.iter().enumerate() {
        let failures: u64 = (0..trials)
            .into_par_iter()
            .map(|t| {
                let s = derive_seed(seed, &[ROLE_CALIBRATION, gi as u64, t]);
                u64::from(trial_fails(kind, eps, m, s))
            })
            .sum();
        if failures == 0 || failures == trials {
            return Err(BoundsError::DegenerateFit { m, failures, trials });
        }
        let rate = failures as f64 / trials as f64;
        let hw = 2.5758293035489004 * (rate * (1.0 - rate) / trials as f64).sqrt();
        points.push(CalibrationPoint {
            m,
            trials,
            failures,
            rate,
            neg_log_rate: -rate.ln(),
            neg_log_lo: -(rate + hw).min(1.0).ln(),
            neg_log_hi: -(rate - hw).max(1.0 / trials as f64).ln(),
        });
    }

    // free log-log regression of -log(rate) on m
    let xs: Vec<f64> = points.iter().map(|p| (p.m as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.neg_log_rate.ln()).collect();
    let (slope, stderr) = least_squares_slope(&xs, &ys);

    // conservative scale at the theory exponent
    let alpha0 = kind.theory_exponent();
    let mut ratios: Vec<f64> = points
        .iter()
        .map(|p| p.neg_log_rate / (p.m as f64).powf(alpha0))
        .collect();
    ratios.sort_by(f64::total_cmp);
    let idx = if ratios.len() >= 10 {
        (ratios.len() - 1) / 10
    } else {
        0
    };
    let conservative_scale = ratios[idx];
    let covered = points
        .iter()
        .filter(|p| conservative_scale * (p.m as f64).powf(alpha0) <= p.neg_log_rate)
        .count();
    let coverage = covered as f64 / points.len() as f64;

    Ok(Calibration {
        kind,
        eps,
        points,
        theory_exponent: alpha0,
        fitted_exponent: slope,
        fitted_exponent_stderr: stderr,
        conservative_scale,
        coverage,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return (0.0, f64::INFINITY);
    }
    let slope = sxy / sxx;
    if xs.len() <= 2 {
        return (slope, f64::INFINITY);
    }
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    (slope, stderr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.5, 4.5, 6.5, 8.5];
        let (slope, stderr) = least_squares_slope(&xs, &ys);
        assert!((slope - 2.0).abs() < 1e-12);
        assert!(stderr < 1e-9);
    }

    #[test]
    fn grid_and_trial_validation() {
        assert!(calibrate_phi(CalibrationKind::Gaussian, 0.3, &[], 2000, 0).is_err());
        assert!(calibrate_phi(CalibrationKind::Gaussian, 0.3, &[8], 10, 0).is_err());
        assert!(calibrate_phi(CalibrationKind::Gaussian, 1.5, &[8], 2000, 0).is_err());
    }

    #[test]
    fn degenerate_grid_point_reported() {
        // m large enough that no failure occurs at eps close to 1
        let err = calibrate_phi(CalibrationKind::Gaussian, 0.9, &[4096], 1000, 1).unwrap_err();
        match err {
            BoundsError::DegenerateFit { m, failures, .. } => {
                assert_eq!(m, 4096);
                assert_eq!(failures, 0);
            }
            other => panic!("expected degenerate fit, got {other:?}"),
        }
    }
}
