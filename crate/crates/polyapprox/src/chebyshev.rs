//! Chebyshev-basis polynomials with closed-form ReLU projections.
//!
//! For `relu(t - a)` on [-1, 1], substituting `t = cos(phi)` makes every
//! projection coefficient an elementary integral over `[0, arccos(a)]`:
//!
//! ```text
//! c_0 = (sin th - a th) / pi
//! c_1 = (2/pi) (th/2 + sin(2 th)/4 - a sin th)
//! c_k = (2/pi) [ sin((k-1)th)/(2(k-1)) + sin((k+1)th)/(2(k+1)) - a sin(k th)/k ]
//! ```
//!
//! with `th = arccos(a)`. The coefficients decay like `k^{-2}`, so the
//! degree-`n` truncation has sup error `O(1/n)` — the rate a kink allows.

use crate::{PolyError, Result};

/// A polynomial in the Chebyshev basis on `[lo, hi]`:
/// `p(x) = sum_k coeffs[k] T_k(t)` with `t = 2(x - lo)/(hi - lo) - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(lo: f64, hi: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(PolyError::InvalidParameter(format!(
                "invalid interval [{lo}, {hi}]"
            )));
        }
        if coeffs.is_empty() {
            return Err(PolyError::InvalidParameter(
                "a polynomial needs at least one coefficient".into(),
            ));
        }
        Ok(Self { lo, hi, coeffs })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Clenshaw recurrence evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let t = 2.0 * (x - self.lo) / (self.hi - self.lo) - 1.0;
        let t2 = 2.0 * t;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let tmp = b1;
            b1 = t2 * b1 - b2 + c;
            b2 = tmp;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    /// Returns `alpha * p + beta` on the same interval.
    pub fn affine(&self, alpha: f64, beta: f64) -> Self {
        let mut coeffs: Vec<f64> = self.coeffs.iter().map(|c| alpha * c).collect();
        coeffs[0] += beta;
        Self {
            lo: self.lo,
            hi: self.hi,
            coeffs,
        }
    }
}

/// Chebyshev projection coefficients of `t -> relu(t - a)` on [-1, 1],
/// truncated at `degree` (so `degree + 1` coefficients).
pub fn shifted_relu_coeffs(a: f64, degree: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    debug_assert!((-1.0..=1.0).contains(&a));
    let th = a.clamp(-1.0, 1.0).acos();
    let mut c = Vec::with_capacity(degree + 1);
    c.push((th.sin() - a * th) / PI);
    if degree >= 1 {
        c.push((2.0 / PI) * (th / 2.0 + (2.0 * th).sin() / 4.0 - a * th.sin()));
    }
    for k in 2..=degree {
        let kf = k as f64;
        let v = ((kf - 1.0) * th).sin() / (2.0 * (kf - 1.0))
            + ((kf + 1.0) * th).sin() / (2.0 * (kf + 1.0))
            - a * (kf * th).sin() / kf;
        c.push(2.0 / PI * v);
    }
    c
}

/// Chebyshev projection of `relu` on [-1, 1] to the given degree.
///
/// The sup error of this construction on a dense grid is below `1/degree`
/// (observed constant about 0.32, consistent with the `1/pi` coefficient
/// tail of the underlying `|t|` expansion).
pub fn relu_approx(degree: usize) -> Result<Poly> {
    if degree < 2 {
        return Err(PolyError::InvalidParameter(format!(
            "relu approximation needs degree >= 2, got {degree}"
        )));
    }
    Poly::new(-1.0, 1.0, shifted_relu_coeffs(0.0, degree))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_sup_error(p: &Poly, f: impl Fn(f64) -> f64, n: usize) -> f64 {
        (0..=n)
            .map(|i| {
                let x = p.lo() + (p.hi() - p.lo()) * i as f64 / n as f64;
                (p.eval(x) - f(x)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_and_linear_coefficients_exact_at_zero_shift() {
        let c = shifted_relu_coeffs(0.0, 4);
        assert!((c[0] - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!((c[1] - 0.5).abs() < 1e-15);
        assert!(c[3].abs() < 1e-15); // odd coefficients beyond T_1 vanish
    }

    #[test]
    fn relu_endpoints_within_rate() {
        for d in [4usize, 16, 64] {
            let p = relu_approx(d).unwrap();
            let c = 1.0 / d as f64;
            assert!(p.eval(-1.0).abs() <= c, "p(-1) = {} at degree {d}", p.eval(-1.0));
            assert!((p.eval(1.0) - 1.0).abs() <= c);
        }
    }

    #[test]
    fn relu_error_decays_like_one_over_degree() {
        let errs: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&d| grid_sup_error(&relu_approx(d).unwrap(), |x| x.max(0.0), 10_000))
            .collect();
        for w in errs.windows(2) {
            assert!(w[0] > w[1], "errors not decreasing: {errs:?}");
            assert!(w[0] / w[1] >= 1.5, "ratio below 1.5: {errs:?}");
        }
        // documented rate constant: error <= 1/degree
        for (&d, &e) in [8usize, 16, 32, 64].iter().zip(&errs) {
            assert!(e <= 1.0 / d as f64, "error {e} at degree {d}");
        }
    }

    #[test]
    fn relu_approx_minus_half_x_is_even() {
        let p = relu_approx(32).unwrap();
        for i in 0..=1000 {
            let x = -1.0 + 2.0 * i as f64 / 1000.0;
            let f = |x: f64| p.eval(x) - x / 2.0;
            assert!((f(x) - f(-x)).abs() <= 1e-10);
        }
    }

    #[test]
    fn shifted_relu_projection_matches_quadrature_oracle() {
        // Gauss-Chebyshev quadrature oracle for the projection coefficients
        use std::f64::consts::PI;
        let a = 0.3;
        let degree = 6;
        let closed = shifted_relu_coeffs(a, degree);
        let nodes = 20_000;
        for (k, &ck) in closed.iter().enumerate() {
            let mut acc = 0.0;
            for j in 0..nodes {
                let phi = PI * (j as f64 + 0.5) / nodes as f64;
                let t = phi.cos();
                acc += (t - a).max(0.0) * (k as f64 * phi).cos();
            }
            let scale = if k == 0 { 1.0 } else { 2.0 };
            let oracle = scale * acc / nodes as f64;
            assert!(
                (ck - oracle).abs() <= 1e-6,
                "coefficient {k}: closed {ck} vs quadrature {oracle}"
            );
        }
    }

    #[test]
    fn degree_below_two_rejected() {
        assert!(relu_approx(1).is_err());
    }

    #[test]
    fn affine_shifts_constant_term() {
        let p = relu_approx(8).unwrap();
        let q = p.affine(2.0, 0.25);
        for i in 0..=100 {
            let x = -1.0 + 2.0 * i as f64 / 100.0;
            assert!((q.eval(x) - (2.0 * p.eval(x) + 0.25)).abs() <= 1e-14);
        }
    }
}
