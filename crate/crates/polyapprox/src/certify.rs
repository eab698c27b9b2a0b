//! Finite-point median certificates.
//!
//! Given the matrix of member norms `||S_i x_j||^2` of a committee on a point
//! set, the certificate evaluates the counting polynomials
//! `P(x) = sum_i p(||S_i x||^2)` and `R(x) = sum_i r(||S_i x||^2)` and checks
//! both against the threshold `(k+1) eta + k`. Whenever every column's median
//! lies in `[1 - eps/2, 1 + eps/2]`, at least `k+1` members contribute at most
//! `eta` each and the remaining at most `k` contribute at most 1, so a
//! compliant committee always passes. The polynomials are built on `[0, 2M]`,
//! the range the norming-set inflation allows; this certifies the hypothesis
//! on the supplied points only — the extension from a norming set to the whole
//! variety is not a finite computation.

use crate::counting::{counting_poly_lower, counting_poly_upper};
use crate::{PolyError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateSide {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy)]
pub struct CertificateWitness {
    pub point: usize,
    pub side: CertificateSide,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct MedianCertificate {
    pub pass: bool,
    /// The counting threshold `(k+1) eta + k`.
    pub threshold: f64,
    /// First violating point, when failing.
    pub witness: Option<CertificateWitness>,
    pub degree: usize,
}

/// Checks the counting-polynomial certificate on a `(2k+1) x P` matrix of
/// squared member norms (`norms_sq[i][j]` is member `i` at point `j`).
///
/// Requires `eta <= 1/(3(k+1))`, `m_bound >= 3`, and every entry in
/// `[0, m_bound]`.
pub fn certify_median_on_points(
    norms_sq: &[Vec<f64>],
    eps: f64,
    m_bound: f64,
    eta: f64,
) -> Result<MedianCertificate> {
    let members = norms_sq.len();
    if members == 0 || members.is_multiple_of(2) {
        return Err(PolyError::InvalidParameter(format!(
            "committee size {members} must be odd and positive"
        )));
    }
    let k = (members - 1) / 2;
    let points = norms_sq[0].len();
    if norms_sq.iter().any(|row| row.len() != points) {
        return Err(PolyError::InvalidParameter(
            "ragged norm matrix".into(),
        ));
    }
    let eta_max = 1.0 / (3.0 * (k as f64 + 1.0));
    if !(eta > 0.0 && eta <= eta_max) {
        return Err(PolyError::InvalidParameter(format!(
            "eta = {eta} outside (0, 1/(3(k+1))] = (0, {eta_max}]"
        )));
    }
    if m_bound < 3.0 {
        return Err(PolyError::InvalidParameter(format!(
            "norm bound M = {m_bound} below 3"
        )));
    }
    for (i, row) in norms_sq.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !(0.0..=m_bound).contains(&v) {
                return Err(PolyError::EntryOutOfRange {
                    row: i,
                    col: j,
                    value: v,
                    max: m_bound,
                });
            }
        }
    }

    let upper = counting_poly_upper(eps, 2.0 * m_bound, eta)?;
    let lower = counting_poly_lower(eps, 2.0 * m_bound, eta)?;
    let threshold = (k as f64 + 1.0) * eta + k as f64;

    for j in 0..points {
        let mut p_sum = 0.0;
        let mut r_sum = 0.0;
        for row in norms_sq {
            p_sum += upper.poly.eval(row[j]);
            r_sum += lower.poly.eval(row[j]);
        }
        if p_sum > threshold {
            return Ok(MedianCertificate {
                pass: false,
                threshold,
                witness: Some(CertificateWitness {
                    point: j,
                    side: CertificateSide::Upper,
                    value: p_sum,
                }),
                degree: upper.degree_bound,
            });
        }
        if r_sum > threshold {
            return Ok(MedianCertificate {
                pass: false,
                threshold,
                witness: Some(CertificateWitness {
                    point: j,
                    side: CertificateSide::Lower,
                    value: r_sum,
                }),
                degree: upper.degree_bound,
            });
        }
    }
    Ok(MedianCertificate {
        pass: true,
        threshold,
        witness: None,
        degree: upper.degree_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_norms_pass() {
        let norms = vec![vec![1.0; 4]; 5]; // k = 2
        let cert = certify_median_on_points(&norms, 0.4, 3.0, 0.1).unwrap();
        assert!(cert.pass);
        assert!(cert.witness.is_none());
    }

    #[test]
    fn k_plus_one_members_above_one_plus_eps_fail() {
        let eps = 0.4;
        let k = 2;
        // point 0: k+1 members at 1 + eps, the rest at 1.0
        let mut norms = vec![vec![1.0; 3]; 2 * k + 1];
        for row in norms.iter_mut().take(k + 1) {
            row[0] = 1.0 + eps;
        }
        let cert = certify_median_on_points(&norms, eps, 3.0, 0.1).unwrap();
        assert!(!cert.pass);
        let w = cert.witness.unwrap();
        assert_eq!(w.point, 0);
        assert_eq!(w.side, CertificateSide::Upper);
    }

    #[test]
    fn k_plus_one_members_below_one_minus_eps_fail() {
        let eps = 0.4;
        let k = 1;
        let mut norms = vec![vec![1.0; 2]; 2 * k + 1];
        for row in norms.iter_mut().take(k + 1) {
            row[1] = 1.0 - eps;
        }
        let cert = certify_median_on_points(&norms, eps, 3.0, 0.1).unwrap();
        assert!(!cert.pass);
        let w = cert.witness.unwrap();
        assert_eq!(w.point, 1);
        assert_eq!(w.side, CertificateSide::Lower);
    }

    #[test]
    fn eta_hypothesis_enforced() {
        let norms = vec![vec![1.0]; 5]; // k = 2, eta must be <= 1/9
        assert!(certify_median_on_points(&norms, 0.4, 3.0, 0.12).is_err());
        assert!(certify_median_on_points(&norms, 0.4, 3.0, 1.0 / 9.0).is_ok());
    }

    #[test]
    fn entries_above_m_rejected() {
        let norms = vec![vec![3.5]; 3];
        match certify_median_on_points(&norms, 0.4, 3.0, 0.1) {
            Err(PolyError::EntryOutOfRange { row: 0, col: 0, .. }) => {}
            other => panic!("expected entry range error, got {other:?}"),
        }
    }
}
