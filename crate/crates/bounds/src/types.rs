use serde::{Deserialize, Serialize};

use crate::{BoundsError, Result};

/// The universal constants appearing in the bounds, all defaulting to 1.
/// `k` bounds the psi-2 norm of sub-Gaussian entries; `m` is the norm bound
/// of bounded sketch kinds and defaults to the ambient dimension N when
/// absent (the Rademacher Khatri-Rao row norm gives exactly that).
///
/// Slot usage: `c1`, `c2` scale the norming-set and threshold terms (and
/// stand in for the order-dependent pair in the tensor moment bound);
/// `c3` scales every tail function and outer dimension formula;
/// `c4` scales the committee size bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstantSet {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

impl Default for ConstantSet {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            k: 1.0,
            m: None,
        }
    }
}

impl ConstantSet {
    pub fn validate(&self) -> Result<()> {
        let all = [self.c1, self.c2, self.c3, self.c4, self.k];
        if all.iter().any(|&c| !c.is_finite() || c <= 0.0) {
            return Err(BoundsError::InvalidParameter(format!(
                "constants must be strictly positive and finite: {self:?}"
            )));
        }
        if let Some(m) = self.m {
            if !m.is_finite() || m <= 0.0 {
                return Err(BoundsError::InvalidParameter(format!(
                    "norm bound M = {m} must be strictly positive"
                )));
            }
        }
        Ok(())
    }
}

/// Geometry of the set being sketched, reduced to the parameters the bounds
/// consume. Degrees are carried in log-space so Bezout-sized degrees d^n fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VarietyParams {
    /// Subset of an irreducible variety of dimension n and degree exp(log_degree).
    Variety { n: u32, log_degree: f64 },
    /// Image of a polynomial map from R^n with coordinate degrees <= d.
    Polymap { n: u32, d: u32 },
    /// Finite union of irreducible components (log_degree_i, n_i).
    Reducible { components: Vec<(f64, u32)> },
}

impl VarietyParams {
    pub fn variety(n: u32, degree: f64) -> Result<Self> {
        if !degree.is_finite() || degree < 1.0 {
            return Err(BoundsError::InvalidParameter(format!(
                "variety degree {degree} below 1"
            )));
        }
        Ok(VarietyParams::Variety {
            n,
            log_degree: degree.ln(),
        })
    }

    pub fn polymap(n: u32, d: u32) -> Result<Self> {
        if d < 1 {
            return Err(BoundsError::InvalidParameter(
                "polynomial map degree must be at least 1".into(),
            ));
        }
        Ok(VarietyParams::Polymap { n, d })
    }

    /// CP tensors with the given mode lengths and rank bound, as a polynomial
    /// image: n_v = r * sum_j n_j parameters, coordinate degree d = the order.
    pub fn cp_tensor(mode_lengths: &[usize], rank: usize) -> Result<Self> {
        if mode_lengths.is_empty() {
            return Err(BoundsError::InvalidParameter(
                "CP preset needs at least one mode".into(),
            ));
        }
        let n: usize = mode_lengths.iter().sum::<usize>() * rank;
        Self::polymap(n as u32, mode_lengths.len() as u32)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            VarietyParams::Variety { log_degree, .. } => {
                if *log_degree < 0.0 || !log_degree.is_finite() {
                    return Err(BoundsError::InvalidParameter(format!(
                        "log degree {log_degree} must be finite and nonnegative"
                    )));
                }
            }
            VarietyParams::Polymap { d, .. } => {
                if *d < 1 {
                    return Err(BoundsError::InvalidParameter(
                        "polynomial map degree must be at least 1".into(),
                    ));
                }
            }
            VarietyParams::Reducible { components } => {
                if components.is_empty() {
                    return Err(BoundsError::InvalidParameter(
                        "reducible variety needs at least one component".into(),
                    ));
                }
                for (ld, _) in components {
                    if *ld < 0.0 || !ld.is_finite() {
                        return Err(BoundsError::InvalidParameter(format!(
                            "component log degree {ld} must be finite and nonnegative"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Intrinsic dimension fed to the committee bound (max over components).
    pub fn dimension(&self) -> u32 {
        match self {
            VarietyParams::Variety { n, .. } => *n,
            VarietyParams::Polymap { n, .. } => *n,
            VarietyParams::Reducible { components } => {
                components.iter().map(|&(_, n)| n).max().unwrap_or(0)
            }
        }
    }
}

/// An exponential tail function: the ensemble embeds a fixed vector to relative
/// error eps except with probability `exp(-phi(m, eps))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiFunction {
    /// `phi(m, eps) = c m eps^2 / k^2` (sub-Gaussian rows).
    SubGaussian { c: f64, k: f64 },
    /// Tensor-structured sketch of the given order: the inverse of the
    /// moment-bound dimension `m = max(c1d eps^-1 phi^d, c2d eps^-2 phi)`,
    /// i.e. `phi(m, eps) = min((eps m / c1d)^{1/d}, eps^2 m / c2d)`.
    TensorOrder { d: u32, c1d: f64, c2d: f64 },
    /// Empirical table of (m, phi) pairs at a fixed calibration eps,
    /// interpolated linearly; must be nondecreasing in m.
    Table { eps: f64, points: Vec<(f64, f64)> },
}

impl PhiFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            PhiFunction::SubGaussian { c, k } => {
                if !(*c > 0.0 && *k > 0.0) {
                    return Err(BoundsError::InvalidParameter(
                        "sub-Gaussian phi needs positive c and k".into(),
                    ));
                }
            }
            PhiFunction::TensorOrder { d, c1d, c2d } => {
                if *d < 1 || !(*c1d > 0.0 && *c2d > 0.0) {
                    return Err(BoundsError::InvalidParameter(
                        "tensor-order phi needs d >= 1 and positive constants".into(),
                    ));
                }
            }
            PhiFunction::Table { points, .. } => {
                if points.is_empty() {
                    return Err(BoundsError::InvalidParameter("empty phi table".into()));
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 || w[1].1 < w[0].1 {
                        return Err(BoundsError::InvalidParameter(
                            "phi table must be strictly increasing in m and nondecreasing in phi"
                                .into(),
                        ));
                    }
                }
                if points.iter().any(|&(m, p)| m <= 0.0 || p < 0.0) {
                    return Err(BoundsError::InvalidParameter(
                        "phi table needs positive m and nonnegative phi".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Tail exponent at output dimension m and accuracy eps.
    pub fn evaluate(&self, m: f64, eps: f64) -> f64 {
        match self {
            PhiFunction::SubGaussian { c, k } => c * m * eps * eps / (k * k),
            PhiFunction::TensorOrder { d, c1d, c2d } => {
                let a = (eps * m / c1d).powf(1.0 / *d as f64);
                let b = eps * eps * m / c2d;
                a.min(b)
            }
            PhiFunction::Table { points, .. } => {
                if m <= points[0].0 {
                    return points[0].1 * (m / points[0].0);
                }
                for w in points.windows(2) {
                    if m <= w[1].0 {
                        let t = (m - w[0].0) / (w[1].0 - w[0].0);
                        return w[0].1 + t * (w[1].1 - w[0].1);
                    }
                }
                points[points.len() - 1].1
            }
        }
    }

    /// Smallest integer m with `phi(m, eps) >= target`.
    pub fn min_dim(&self, eps: f64, target: f64) -> Result<u64> {
        if target <= 0.0 {
            return Ok(1);
        }
        match self {
            PhiFunction::SubGaussian { c, k } => {
                Ok(crate::ceil_at_least(k * k * target / (c * eps * eps), 1))
            }
            PhiFunction::TensorOrder { d, c1d, c2d } => {
                let a = c1d * target.powi(*d as i32) / eps;
                let b = c2d * target / (eps * eps);
                Ok(crate::ceil_at_least(a.max(b), 1))
            }
            PhiFunction::Table { points, .. } => {
                if target > points[points.len() - 1].1 {
                    return Err(BoundsError::InvalidParameter(format!(
                        "target phi {target} beyond table range"
                    )));
                }
                let mut m = 1u64;
                while self.evaluate(m as f64, eps) < target {
                    m += 1;
                }
                Ok(m)
            }
        }
    }
}
