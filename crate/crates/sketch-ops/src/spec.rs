use serde::{Deserialize, Serialize};

use tensor_core::ambient_dim;

use crate::op::{
    make_fjlt, make_gaussian, make_identity, make_khatri_rao, make_kfjlt, make_kronecker,
    make_rademacher, RowDistribution, SketchKind, SketchOperator,
};
use crate::seed::{derive_seed, ROLE_KRON_MODE};
use crate::{Result, SketchError};

/// Input geometry: a flat dimension N or per-mode lengths (n_1, ..., n_d).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputShape {
    Flat(usize),
    Modes(Vec<usize>),
}

impl InputShape {
    pub fn ambient_dim(&self) -> u128 {
        match self {
            InputShape::Flat(n) => *n as u128,
            InputShape::Modes(modes) => ambient_dim(modes),
        }
    }

    /// Mode lengths view; a flat shape is a single mode.
    pub fn mode_lengths(&self) -> &[usize] {
        match self {
            InputShape::Flat(n) => std::slice::from_ref(n),
            InputShape::Modes(modes) => modes,
        }
    }
}

/// Serializable description of a sketch operator. The realized randomness is
/// reconstructed from `seed` at build time and never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: SketchKind,
    pub m: usize,
    pub input_shape: InputShape,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_distribution: Option<RowDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_ops: Option<Vec<OperatorSpec>>,
}

impl OperatorSpec {
    /// Replaces the seed, re-deriving nested Kronecker mode seeds from it.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.seed = seed;
        if let Some(mode_ops) = &mut out.mode_ops {
            for (j, sub) in mode_ops.iter_mut().enumerate() {
                *sub = sub.with_seed(derive_seed(seed, &[ROLE_KRON_MODE, j as u64]));
            }
        }
        out
    }

    /// Realizes the operator described by this spec.
    pub fn build(&self) -> Result<SketchOperator> {
        match self.kind {
            SketchKind::Gaussian | SketchKind::Rademacher => {
                let n = self.require_flat()?;
                match self.kind {
                    SketchKind::Gaussian => make_gaussian(self.m, n, self.seed),
                    _ => make_rademacher(self.m, n, self.seed),
                }
            }
            SketchKind::Fjlt => {
                let n = self.require_flat()?;
                make_fjlt(self.m, n, self.seed)
            }
            SketchKind::KhatriRao => {
                let dist = self.row_distribution.unwrap_or(RowDistribution::Gaussian);
                make_khatri_rao(self.m, self.input_shape.mode_lengths(), dist, self.seed)
            }
            SketchKind::Kfjlt => make_kfjlt(self.m, self.input_shape.mode_lengths(), self.seed),
            SketchKind::Kronecker => {
                let specs = self.mode_ops.as_ref().ok_or_else(|| {
                    SketchError::InvalidParameter(
                        "kronecker spec requires mode_ops".into(),
                    )
                })?;
                let ops = specs
                    .iter()
                    .map(|s| s.build())
                    .collect::<Result<Vec<_>>>()?;
                let op = make_kronecker(ops)?;
                if self.m != 0 && self.m != op.m() {
                    return Err(SketchError::InvalidParameter(format!(
                        "kronecker spec m = {} but mode output dimensions give {}",
                        self.m,
                        op.m()
                    )));
                }
                Ok(op)
            }
            SketchKind::Identity => make_identity(self.input_shape.clone()),
        }
    }

    fn require_flat(&self) -> Result<usize> {
        match &self.input_shape {
            InputShape::Flat(n) => Ok(*n),
            InputShape::Modes(m) => Err(SketchError::InvalidParameter(format!(
                "kind {:?} takes a flat input dimension, got modes {m:?}",
                self.kind
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_roundtrip() {
        let spec = OperatorSpec {
            kind: SketchKind::KhatriRao,
            m: 16,
            input_shape: InputShape::Modes(vec![4, 4, 4]),
            seed: 99,
            row_distribution: Some(RowDistribution::Rademacher),
            mode_ops: None,
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"kind\":\"khatri_rao\""));
        assert!(s.contains("\"input_shape\":[4,4,4]"));
        let back: OperatorSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn flat_shape_serializes_as_number() {
        let spec = OperatorSpec {
            kind: SketchKind::Gaussian,
            m: 8,
            input_shape: InputShape::Flat(32),
            seed: 1,
            row_distribution: None,
            mode_ops: None,
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"input_shape\":32"));
    }

    #[test]
    fn build_matches_direct_constructor() {
        let spec = OperatorSpec {
            kind: SketchKind::Gaussian,
            m: 4,
            input_shape: InputShape::Flat(8),
            seed: 5,
            row_distribution: None,
            mode_ops: None,
        };
        let op = spec.build().unwrap();
        let direct = make_gaussian(4, 8, 5).unwrap();
        let x = tensor_core::DenseVector::new((0..8).map(|i| i as f64).collect());
        assert_eq!(
            op.apply_dense(&x).unwrap(),
            direct.apply_dense(&x).unwrap()
        );
    }

    #[test]
    fn with_seed_rederives_kronecker_modes() {
        let sub = OperatorSpec {
            kind: SketchKind::Gaussian,
            m: 2,
            input_shape: InputShape::Flat(4),
            seed: 0,
            row_distribution: None,
            mode_ops: None,
        };
        let spec = OperatorSpec {
            kind: SketchKind::Kronecker,
            m: 0,
            input_shape: InputShape::Modes(vec![4, 4]),
            seed: 0,
            row_distribution: None,
            mode_ops: Some(vec![sub.clone(), sub]),
        };
        let a = spec.with_seed(10);
        let subs = a.mode_ops.as_ref().unwrap();
        assert_ne!(subs[0].seed, subs[1].seed);
        let b = spec.with_seed(10);
        assert_eq!(a, b);
    }
}
