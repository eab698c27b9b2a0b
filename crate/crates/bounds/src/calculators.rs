//! Closed-form bound calculators. Sums of exponentials go through
//! log-sum-exp, degrees are taken in log-space, and integer outputs are
//! ceilings computed with a 1e-9 slack so that exactly-integral values do
//! not round up on floating-point noise.

use crate::types::{ConstantSet, VarietyParams};
use crate::{ceil_at_least, BoundsError, Result};

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 || v >= 1.0 {
        return Err(BoundsError::InvalidParameter(format!(
            "{name} = {v} not in (0, 1)"
        )));
    }
    Ok(())
}

/// `n log(C2 n)` with the n = 0 limit convention of 0; generalized to
/// `n log(C2 n d)` when a degree factor is present.
fn dim_log_term(c2: f64, n: u32, d_factor: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * (c2 * n as f64 * d_factor).ln()
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Log-cardinality bound for a (d, omega) norming set of a compact subset of
/// an equi-dimensional variety with the given log-degree and dimension:
/// `C1 log D + C1 n (log(C2 n d) - log log omega)`.
pub fn norming_log_card(
    log_degree: f64,
    n: u32,
    d: u32,
    omega: f64,
    consts: &ConstantSet,
) -> Result<f64> {
    consts.validate()?;
    if log_degree < 0.0 || !log_degree.is_finite() {
        return Err(BoundsError::InvalidParameter(format!(
            "log degree {log_degree} must be finite and nonnegative"
        )));
    }
    if d < 1 {
        return Err(BoundsError::InvalidParameter(
            "polynomial degree d must be at least 1".into(),
        ));
    }
    if !omega.is_finite() || omega <= 1.0 {
        return Err(BoundsError::InvalidParameter(format!(
            "norming factor omega = {omega} must exceed 1"
        )));
    }
    let n_term = if n == 0 {
        0.0
    } else {
        n as f64 * ((consts.c2 * n as f64 * d as f64).ln() - omega.ln().ln())
    };
    Ok(consts.c1 * log_degree + consts.c1 * n_term)
}

/// Threshold the tail function must clear at accuracy `eps / sqrt(2)`:
/// variety `C1 log D + C1 n log(C2 n) + log(1/delta)`, polymap with
/// `log D` replaced by `n log d`, reducible through log-sum-exp over
/// components.
pub fn required_phi(vp: &VarietyParams, delta: f64, consts: &ConstantSet) -> Result<f64> {
    consts.validate()?;
    vp.validate()?;
    check_unit_interval("delta", delta)?;
    let log_inv_delta = (1.0 / delta).ln();
    let value = match vp {
        VarietyParams::Variety { n, log_degree } => {
            consts.c1 * log_degree + consts.c1 * dim_log_term(consts.c2, *n, 1.0)
        }
        VarietyParams::Polymap { n, d } => {
            let log_d_term = if *n == 0 {
                0.0
            } else {
                *n as f64 * (*d as f64).ln()
            };
            consts.c1 * log_d_term + consts.c1 * dim_log_term(consts.c2, *n, 1.0)
        }
        VarietyParams::Reducible { components } => {
            let terms: Vec<f64> = components
                .iter()
                .map(|&(log_degree, n)| {
                    consts.c1 * log_degree + consts.c1 * dim_log_term(consts.c2, n, 1.0)
                })
                .collect();
            log_sum_exp(&terms)
        }
    };
    Ok(value + log_inv_delta)
}

/// Smallest m for which the sub-Gaussian tail `phi(m, eps) = C3 m eps^2 / K^2`
/// clears [`required_phi`] at `eps / sqrt(2)`; with unit constants this is
/// `ceil(2 K^2 threshold / eps^2)`.
pub fn subgaussian_dim(
    eps: f64,
    delta: f64,
    vp: &VarietyParams,
    k_psi2: f64,
    consts: &ConstantSet,
) -> Result<u64> {
    check_unit_interval("eps", eps)?;
    if !k_psi2.is_finite() || k_psi2 <= 0.0 {
        return Err(BoundsError::InvalidParameter(format!(
            "psi-2 bound K = {k_psi2} must be positive"
        )));
    }
    let threshold = required_phi(vp, delta, consts)?;
    Ok(ceil_at_least(
        2.0 * k_psi2 * k_psi2 * threshold / (consts.c3 * eps * eps),
        1,
    ))
}

/// Single-vector sufficient dimension of an order-d tensor-structured sketch:
/// `max(C_{1,d} eps^-1 log^d(1/delta), C_{2,d} eps^-2 log(1/delta))`,
/// with `consts.c1`/`consts.c2` in the order-dependent slots.
pub fn tensor_sufficient_dim(eps: f64, delta: f64, d: u32, consts: &ConstantSet) -> Result<u64> {
    consts.validate()?;
    check_unit_interval("eps", eps)?;
    check_unit_interval("delta", delta)?;
    if d < 1 {
        return Err(BoundsError::InvalidParameter(
            "tensor order d must be at least 1".into(),
        ));
    }
    let log_inv_delta = (1.0 / delta).ln();
    let a = consts.c1 * log_inv_delta.powi(d as i32) / eps;
    let b = consts.c2 * log_inv_delta / (eps * eps);
    Ok(ceil_at_least(a.max(b), 1))
}

/// The order-d power-law tail `phi(m, eps) = C3 m^{1/d}`; the default form
/// carries no eps dependence (eps enters through the sufficient-dimension
/// inversion instead).
pub fn tensor_phi(m: f64, _eps: f64, d: u32, consts: &ConstantSet) -> f64 {
    consts.c3 * m.powf(1.0 / d as f64)
}

/// FJLT sufficient dimension
/// `C3 eps^-2 Delta [log^2(eps^-1 Delta) log N + log(1/delta)]` with
/// `Delta = required_phi(vp, delta)`.
pub fn fjlt_dim(
    eps: f64,
    delta: f64,
    vp: &VarietyParams,
    n_ambient: f64,
    consts: &ConstantSet,
) -> Result<u64> {
    check_unit_interval("eps", eps)?;
    if !n_ambient.is_finite() || n_ambient < 2.0 {
        return Err(BoundsError::InvalidParameter(format!(
            "ambient dimension N = {n_ambient} must be finite and at least 2"
        )));
    }
    let big_delta = required_phi(vp, delta, consts)?;
    let log_term = (big_delta / eps).ln().powi(2) * n_ambient.ln();
    let m = consts.c3 / (eps * eps) * big_delta * (log_term + (1.0 / delta).ln());
    Ok(ceil_at_least(m, 1))
}

/// Committee size bound `k >= C4 (n_v log(M/eps) + log(1/delta))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CommitteeBound {
    pub k: u64,
    /// 2k + 1.
    pub size: u64,
    /// Set when M < n_v: the simplified bound assumed M >= n_v.
    pub m_below_dimension: bool,
}

pub fn median_committee_k(
    n_v: u32,
    m_bound: f64,
    eps: f64,
    delta: f64,
    consts: &ConstantSet,
) -> Result<CommitteeBound> {
    consts.validate()?;
    check_unit_interval("eps", eps)?;
    check_unit_interval("delta", delta)?;
    if !m_bound.is_finite() || m_bound <= 0.0 {
        return Err(BoundsError::InvalidParameter(format!(
            "norm bound M = {m_bound} must be positive and finite"
        )));
    }
    let raw = consts.c4 * (n_v as f64 * (m_bound / eps).ln() + (1.0 / delta).ln());
    let k = if raw <= 0.0 { 0 } else { ceil_at_least(raw, 0) };
    Ok(CommitteeBound {
        k,
        size: 2 * k + 1,
        m_below_dimension: m_bound < n_v as f64,
    })
}

/// Total linear measurements of a committee: `m (2k + 1)`.
pub fn total_measurements(m: u64, k: u64) -> u64 {
    m * (2 * k + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_handles_large_terms() {
        // degrees around 10^300 arrive as log-degrees near 690
        let v = log_sum_exp(&[690.0, 690.0]);
        assert!((v - (690.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn norming_rejects_bad_omega() {
        let c = ConstantSet::default();
        assert!(norming_log_card(0.0, 2, 4, 1.0, &c).is_err());
        assert!(norming_log_card(0.0, 2, 4, 0.5, &c).is_err());
    }

    #[test]
    fn zero_dimension_uses_limit_convention() {
        let c = ConstantSet::default();
        // n = 0, D = 1: the whole bound collapses to C1 log 1 = 0
        assert_eq!(norming_log_card(0.0, 0, 4, 2.0, &c).unwrap(), 0.0);
        let vp = VarietyParams::variety(0, 1.0).unwrap();
        let t = required_phi(&vp, 0.5, &c).unwrap();
        assert!((t - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn total_measurements_reference() {
        assert_eq!(total_measurements(64, 3), 448);
    }

    #[test]
    fn delta_halving_adds_bounded_increment() {
        let c = ConstantSet::default();
        let vp = VarietyParams::polymap(3, 2).unwrap();
        let eps = 0.5;
        let m1 = subgaussian_dim(eps, 0.01, &vp, 1.0, &c).unwrap();
        let m2 = subgaussian_dim(eps, 0.005, &vp, 1.0, &c).unwrap();
        let max_step = (2.0 * 2f64.ln() / (eps * eps)).ceil() as u64;
        assert!(m2 >= m1);
        assert!(m2 - m1 <= max_step + 1);
    }
}
