use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{ambient_dim, DenseVector, Result, TensorError, DEFAULT_MATERIALIZE_CAP};

/// Entry distribution for random factor matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorDistribution {
    Gaussian,
    Rademacher,
}

/// A tensor in canonical polyadic (CP) form: `d` factor matrices of shape
/// `n_j x r`, representing the sum of `r` outer products of their columns.
///
/// Factor matrices are stored column-major, so column `i` of mode `j`
/// (the mode-`j` vector of the `i`-th rank-one term) is contiguous.
/// Rank `r = 0` encodes the zero tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct CpTensor {
    mode_lengths: Vec<usize>,
    rank: usize,
    factors: Vec<Vec<f64>>,
}

impl CpTensor {
    /// Builds a CP tensor from column-major factor matrices.
    pub fn new(mode_lengths: Vec<usize>, rank: usize, factors: Vec<Vec<f64>>) -> Result<Self> {
        if mode_lengths.is_empty() {
            return Err(TensorError::InvalidArgument(
                "tensor order d must be at least 1".into(),
            ));
        }
        if mode_lengths.contains(&0) {
            return Err(TensorError::InvalidArgument(
                "every mode length must be at least 1".into(),
            ));
        }
        if factors.len() != mode_lengths.len() {
            return Err(TensorError::ShapeMismatch(format!(
                "{} factor matrices for {} modes",
                factors.len(),
                mode_lengths.len()
            )));
        }
        for (j, f) in factors.iter().enumerate() {
            if f.len() != mode_lengths[j] * rank {
                return Err(TensorError::ShapeMismatch(format!(
                    "factor {} has {} entries, expected {} x {}",
                    j,
                    f.len(),
                    mode_lengths[j],
                    rank
                )));
            }
        }
        Ok(Self {
            mode_lengths,
            rank,
            factors,
        })
    }

    /// The zero tensor of the given shape (rank bound 0).
    pub fn zero(mode_lengths: Vec<usize>) -> Result<Self> {
        let d = mode_lengths.len();
        Self::new(mode_lengths, 0, vec![Vec::new(); d])
    }

    pub fn order(&self) -> usize {
        self.mode_lengths.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn mode_lengths(&self) -> &[usize] {
        &self.mode_lengths
    }

    /// Ambient dimension N as a u128 (may exceed any materializable size).
    pub fn ambient_dim(&self) -> u128 {
        ambient_dim(&self.mode_lengths)
    }

    /// Column-major factor matrix of mode `j` (`n_j x r`).
    pub fn factor(&self, j: usize) -> &[f64] {
        &self.factors[j]
    }

    /// Column `i` of the mode-`j` factor matrix.
    pub fn factor_column(&self, j: usize, i: usize) -> &[f64] {
        let n = self.mode_lengths[j];
        &self.factors[j][i * n..(i + 1) * n]
    }

    /// Materializes with the default entry cap.
    pub fn materialize(&self) -> Result<DenseVector> {
        self.materialize_capped(DEFAULT_MATERIALIZE_CAP)
    }

    /// Materializes the tensor into a flat vector, last mode fastest.
    ///
    /// Errors if the ambient dimension exceeds `cap` entries.
    pub fn materialize_capped(&self, cap: u128) -> Result<DenseVector> {
        let n = self.ambient_dim();
        if n > cap {
            return Err(TensorError::MaterializationCap { entries: n, cap });
        }
        let n = n as usize;
        let mut out = vec![0.0; n];
        let mut scratch = Vec::with_capacity(n);
        for i in 0..self.rank {
            // expand the i-th rank-one term mode by mode; appending the
            // next mode innermost reproduces the last-fastest flattening
            scratch.clear();
            scratch.extend_from_slice(self.factor_column(0, i));
            for j in 1..self.order() {
                let col = self.factor_column(j, i);
                let mut next = Vec::with_capacity(scratch.len() * col.len());
                for &p in &scratch {
                    for &q in col {
                        next.push(p * q);
                    }
                }
                scratch = next;
            }
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += s;
            }
        }
        Ok(DenseVector::new(out))
    }
}

/// Squared Frobenius norm via the Gram identity
/// `||M||^2 = sum_{i,i'} prod_j <A_j[:,i], A_j[:,i']>`,
/// at cost `O(d n r^2)` without materializing.
pub fn cp_norm_sq(t: &CpTensor) -> f64 {
    let r = t.rank();
    if r == 0 {
        return 0.0;
    }
    // hadamard product of per-mode Gram matrices
    let mut gram = vec![1.0; r * r];
    for j in 0..t.order() {
        for i in 0..r {
            let ci = t.factor_column(j, i);
            for ip in 0..r {
                let cip = t.factor_column(j, ip);
                let dot: f64 = ci.iter().zip(cip).map(|(a, b)| a * b).sum();
                gram[i * r + ip] *= dot;
            }
        }
    }
    let total: f64 = gram.iter().sum();
    // the exact value is nonnegative; rounding can leave a tiny negative
    total.max(0.0)
}

/// Difference of two CP tensors as a CP tensor of rank bound `r_x + r_y`:
/// `x`'s columns followed by `y`'s with the mode-0 columns sign-flipped.
pub fn cp_difference(x: &CpTensor, y: &CpTensor) -> Result<CpTensor> {
    if x.mode_lengths() != y.mode_lengths() {
        return Err(TensorError::ShapeMismatch(format!(
            "mode lengths {:?} and {:?} differ",
            x.mode_lengths(),
            y.mode_lengths()
        )));
    }
    let d = x.order();
    let mut factors = Vec::with_capacity(d);
    for j in 0..d {
        let mut f = Vec::with_capacity(x.factors[j].len() + y.factors[j].len());
        f.extend_from_slice(&x.factors[j]);
        if j == 0 {
            f.extend(y.factors[j].iter().map(|v| -v));
        } else {
            f.extend_from_slice(&y.factors[j]);
        }
        factors.push(f);
    }
    CpTensor::new(x.mode_lengths().to_vec(), x.rank() + y.rank(), factors)
}

/// Seeded random CP tensor; deterministic given `(mode_lengths, rank, dist, seed)`.
///
/// Entries are drawn mode by mode, column by column from a single ChaCha8
/// stream seeded by `seed`.
pub fn random_cp(
    mode_lengths: &[usize],
    rank: usize,
    dist: FactorDistribution,
    seed: u64,
) -> Result<CpTensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factors = Vec::with_capacity(mode_lengths.len());
    for &n in mode_lengths {
        let mut f = Vec::with_capacity(n * rank);
        for _ in 0..n * rank {
            let v: f64 = match dist {
                FactorDistribution::Gaussian => rng.sample(StandardNormal),
                FactorDistribution::Rademacher => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            f.push(v);
        }
        factors.push(f);
    }
    CpTensor::new(mode_lengths.to_vec(), rank, factors)
}

/// Rescales the mode-0 factor so that `cp_norm_sq` equals 1.
pub fn normalize_cp(t: &CpTensor) -> Result<CpTensor> {
    let nrm = cp_norm_sq(t).sqrt();
    if nrm == 0.0 || !nrm.is_finite() {
        return Err(TensorError::ZeroNorm);
    }
    let mut out = t.clone();
    for v in out.factors[0].iter_mut() {
        *v /= nrm;
    }
    Ok(out)
}

/// `normalize_cp(random_cp(...))`, the common sampling path for unit points.
pub fn random_unit_cp(
    mode_lengths: &[usize],
    rank: usize,
    dist: FactorDistribution,
    seed: u64,
) -> Result<CpTensor> {
    normalize_cp(&random_cp(mode_lengths, rank, dist, seed)?)
}
