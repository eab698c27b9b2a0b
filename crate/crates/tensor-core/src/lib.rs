//! CP-format and dense tensor representations.
//!
//! A rank-`r` canonical polyadic (CP) tensor is a sum of `r` outer products,
//!
//! ```text
//! M = sum_{i=1}^{r} a_1^(i) ⊗ a_2^(i) ⊗ ... ⊗ a_d^(i),
//! ```
//!
//! stored as `d` factor matrices with `r` columns each. This crate provides
//! the CP representation itself, exact Gram-identity norms that never touch
//! the ambient dimension `N = n_1 * ... * n_d`, materialization to a flat
//! vector (guarded by a configurable entry cap), seeded random generation,
//! and simple JSON / binary serialization.
//!
//! Flattening convention: multi-indices are linearized lexicographically with
//! the **last mode varying fastest** (row-major). Every consumer of flat
//! indices in this workspace shares [`flat_index`] / [`multi_index`].

mod cp;
mod dense;
pub mod io;

pub use cp::{
    cp_difference, cp_norm_sq, normalize_cp, random_cp, random_unit_cp, CpTensor,
    FactorDistribution,
};
pub use dense::{normalize, DenseVector};

use thiserror::Error;

/// Default cap on materialized entry counts (2^24).
pub const DEFAULT_MATERIALIZE_CAP: u128 = 1 << 24;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("materialization of {entries} entries exceeds cap {cap}")]
    MaterializationCap { entries: u128, cap: u128 },
    #[error("cannot normalize a zero-norm vector")]
    ZeroNorm,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// Decomposes a flat index into per-mode indices (last mode fastest).
pub fn multi_index(flat: u128, mode_lengths: &[usize]) -> Vec<usize> {
    let mut idx = vec![0usize; mode_lengths.len()];
    let mut rem = flat;
    for (j, &n) in mode_lengths.iter().enumerate().rev() {
        idx[j] = (rem % n as u128) as usize;
        rem /= n as u128;
    }
    idx
}

/// Linearizes per-mode indices into a flat index (last mode fastest).
pub fn flat_index(multi: &[usize], mode_lengths: &[usize]) -> u128 {
    debug_assert_eq!(multi.len(), mode_lengths.len());
    let mut flat = 0u128;
    for (&i, &n) in multi.iter().zip(mode_lengths) {
        debug_assert!(i < n);
        flat = flat * n as u128 + i as u128;
    }
    flat
}

/// Product of mode lengths as a u128 (the ambient dimension N).
pub fn ambient_dim(mode_lengths: &[usize]) -> u128 {
    mode_lengths.iter().map(|&n| n as u128).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_multi_roundtrip() {
        let shape = [3usize, 4, 5];
        for f in 0..60u128 {
            let m = multi_index(f, &shape);
            assert_eq!(flat_index(&m, &shape), f);
        }
    }

    #[test]
    fn last_mode_fastest() {
        // flat 1 must increment the last coordinate
        assert_eq!(multi_index(1, &[2, 3]), vec![0, 1]);
        assert_eq!(multi_index(3, &[2, 3]), vec![1, 0]);
    }
}
