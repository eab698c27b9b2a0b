//! Sketch operator families with dense and factored application paths.
//!
//! A sketch operator is a realized random linear map `S: R^N -> R^m` drawn
//! from a seeded ensemble. Every operator here is a deterministic function of
//! `(kind, m, input_shape, seed)`; the realized randomness is reconstructed
//! from the seed and never serialized.
//!
//! Supported kinds:
//!
//! - `gaussian`, `rademacher` — dense i.i.d. rows with `E||Sx||^2 = ||x||^2`;
//! - `fjlt` — sign flips, Walsh–Hadamard mixing, uniform row sampling
//!   without replacement on the zero-padded input;
//! - `khatri_rao` — rows are Kronecker products of independent per-mode
//!   sub-Gaussian vectors; applies to CP tensors in `O(m r sum_j n_j)`;
//! - `kronecker` — a tensor product of per-mode operators, applied to CP
//!   tensors by sketching each factor matrix;
//! - `kfjlt` — per-mode sign flips and Hadamard mixing followed by global
//!   row sampling, evaluated directly from mixed factors;
//! - `identity` — passthrough, useful as an experiment control.
//!
//! The factored path `apply_cp` never forms an `N`-length vector for the
//! structured kinds; for dense kinds it falls back to materialization,
//! subject to the `tensor-core` entry cap.

mod op;
pub mod seed;
mod spec;
pub mod wht;

pub use op::{
    make_fjlt, make_gaussian, make_identity, make_khatri_rao, make_kfjlt, make_kronecker,
    make_rademacher, RowDistribution, SketchKind, SketchOperator,
};
pub use spec::{InputShape, OperatorSpec};

use tensor_core::{CpTensor, DenseVector, TensorError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SketchError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("output dimension {m} exceeds padded input dimension {n_pad}")]
    OutputDimTooLarge { m: usize, n_pad: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, SketchError>;

/// Anything a sketch operator can be applied to, together with an exact
/// (sketch-free) squared norm for distortion measurements.
pub trait Sketchable {
    fn sketch(&self, op: &SketchOperator) -> Result<DenseVector>;
    fn norm_sq_exact(&self) -> f64;
}

impl Sketchable for DenseVector {
    fn sketch(&self, op: &SketchOperator) -> Result<DenseVector> {
        op.apply_dense(self)
    }

    fn norm_sq_exact(&self) -> f64 {
        self.norm_sq()
    }
}

impl Sketchable for CpTensor {
    fn sketch(&self, op: &SketchOperator) -> Result<DenseVector> {
        op.apply_cp(self)
    }

    fn norm_sq_exact(&self) -> f64 {
        tensor_core::cp_norm_sq(self)
    }
}
