//! One-stop comparison of every calculator for a given problem.

use serde::{Deserialize, Serialize};

use crate::calculators::{
    fjlt_dim, median_committee_k, required_phi, subgaussian_dim, tensor_sufficient_dim,
    total_measurements, CommitteeBound,
};
use crate::types::{ConstantSet, PhiFunction, VarietyParams};
use crate::{ceil_at_least, Result};

/// The one-sided tail level used for committee members (theta = 1 + log 4).
pub const COMMITTEE_THETA: f64 = 1.0 + 1.3862943611198906;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub variety: VarietyParams,
    pub eps: f64,
    pub delta: f64,
    pub n_ambient: f64,
    pub constants: ConstantSet,
    /// Threshold required_phi(vp, delta) the tail function must clear.
    pub phi_threshold: f64,
    /// Single sub-Gaussian sketch dimension.
    pub subgaussian_m: u64,
    /// Single FJLT sketch dimension.
    pub fjlt_m: u64,
    /// Single order-d tensor-structured sketch dimension (polymap mode only,
    /// with d the coordinate degree).
    pub tensor_m: Option<u64>,
    pub committee: CommitteeBudget,
    /// Reference total-measurement scale
    /// `C3 eps^-2 (n_v log(N/eps) + log(1/delta))`.
    pub headline_total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitteeBudget {
    /// One-sided tail level each member must meet at eps/2.
    pub theta: f64,
    /// Member dimension from the sub-Gaussian tail at theta.
    pub member_m_subgaussian: u64,
    /// Member dimension from the order-d tensor tail at theta (polymap mode).
    pub member_m_tensor: Option<u64>,
    pub bound: CommitteeBound,
    /// member_m_subgaussian * (2k + 1).
    pub total_measurements: u64,
    /// Norm bound M used (defaults to the ambient dimension N).
    pub m_bound: f64,
}

/// Evaluates every calculator on one problem. Pure: recomputation returns an
/// identical report.
pub fn budget_report(
    vp: &VarietyParams,
    eps: f64,
    delta: f64,
    n_ambient: f64,
    consts: &ConstantSet,
) -> Result<BudgetReport> {
    let phi_threshold = required_phi(vp, delta, consts)?;
    let subgaussian_m = subgaussian_dim(eps, delta, vp, consts.k, consts)?;
    let fjlt_m = fjlt_dim(eps, delta, vp, n_ambient, consts)?;
    let tensor_m = match vp {
        VarietyParams::Polymap { d, .. } => Some(tensor_sufficient_dim(eps, delta, *d, consts)?),
        _ => None,
    };

    let m_bound = consts.m.unwrap_or(n_ambient);
    let n_v = vp.dimension();
    let bound = median_committee_k(n_v, m_bound, eps, delta, consts)?;
    let phi_sub = PhiFunction::SubGaussian {
        c: consts.c3,
        k: consts.k,
    };
    let member_m_subgaussian = phi_sub.min_dim(eps / 2.0, COMMITTEE_THETA)?;
    let member_m_tensor = match vp {
        VarietyParams::Polymap { d, .. } => {
            let phi_t = PhiFunction::TensorOrder {
                d: *d,
                c1d: consts.c1,
                c2d: consts.c2,
            };
            Some(phi_t.min_dim(eps / 2.0, COMMITTEE_THETA)?)
        }
        _ => None,
    };
    let headline_total = ceil_at_least(
        consts.c3 / (eps * eps)
            * (n_v as f64 * (n_ambient / eps).ln() + (1.0 / delta).ln()),
        1,
    );

    Ok(BudgetReport {
        variety: vp.clone(),
        eps,
        delta,
        n_ambient,
        constants: *consts,
        phi_threshold,
        subgaussian_m,
        fjlt_m,
        tensor_m,
        committee: CommitteeBudget {
            theta: COMMITTEE_THETA,
            member_m_subgaussian,
            member_m_tensor,
            bound,
            total_measurements: total_measurements(member_m_subgaussian, bound.k),
            m_bound,
        },
        headline_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_is_idempotent() {
        let vp = VarietyParams::cp_tensor(&[8, 8, 8], 2).unwrap();
        let c = ConstantSet::default();
        let a = budget_report(&vp, 0.5, 0.01, 512.0, &c).unwrap();
        let b = budget_report(&vp, 0.5, 0.01, 512.0, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cp_preset_dimension() {
        // n = 8, d = 3, r = 2 gives n_v = n d r = 48
        let vp = VarietyParams::cp_tensor(&[8, 8, 8], 2).unwrap();
        assert_eq!(vp.dimension(), 48);
        match vp {
            VarietyParams::Polymap { n, d } => {
                assert_eq!(n, 48);
                assert_eq!(d, 3);
            }
            other => panic!("expected polymap, got {other:?}"),
        }
    }

    #[test]
    fn committee_m_bound_defaults_to_ambient() {
        let vp = VarietyParams::polymap(6, 3).unwrap();
        let c = ConstantSet::default();
        let r = budget_report(&vp, 0.5, 0.01, 27.0, &c).unwrap();
        assert_eq!(r.committee.m_bound, 27.0);
        let with_m = ConstantSet {
            m: Some(9.0),
            ..ConstantSet::default()
        };
        let r2 = budget_report(&vp, 0.5, 0.01, 27.0, &with_m).unwrap();
        assert_eq!(r2.committee.m_bound, 9.0);
    }
}
