use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use tensor_core::{ambient_dim, multi_index, CpTensor, DenseVector, DEFAULT_MATERIALIZE_CAP};

use crate::seed::{stream, ROLE_ROW_FACTOR, ROLE_ROW_SAMPLE, ROLE_SIGN_DIAG};
use crate::spec::InputShape;
use crate::wht::{fwht_in_place, next_pow2};
use crate::{Result, SketchError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchKind {
    Gaussian,
    Rademacher,
    Fjlt,
    KhatriRao,
    Kronecker,
    Kfjlt,
    Identity,
}

/// Entry distribution of per-row mode vectors (dense and Khatri-Rao kinds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowDistribution {
    Gaussian,
    Rademacher,
}

/// A realized sketch operator. Immutable after construction; `apply_*`
/// calls are pure, so operators are safe to share across threads.
#[derive(Debug, Clone)]
pub struct SketchOperator {
    kind: SketchKind,
    m: usize,
    input_shape: InputShape,
    seed: u64,
    realization: Realization,
}

#[derive(Debug, Clone)]
enum Realization {
    /// Unscaled i.i.d. rows, m x N row-major; output scaled by m^{-1/2}.
    Dense { rows: Vec<f64> },
    /// Sign diagonal over the padded input plus m sampled row indices.
    Fjlt { signs: Vec<f64>, sampled: Vec<usize>, n_pad: usize },
    /// Per-mode row vectors: gathers[j] is m x n_j row-major, unscaled.
    KhatriRao { gathers: Vec<Vec<f64>> },
    /// Per-mode sub-operators; output dimension is the product of theirs.
    Kronecker { ops: Vec<SketchOperator> },
    /// Per-mode sign diagonals, padded mode lengths, global sampled indices.
    Kfjlt {
        mode_signs: Vec<Vec<f64>>,
        padded: Vec<usize>,
        sampled: Vec<u128>,
    },
    Identity,
}

fn gaussian_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn rademacher_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

fn row_vector(rng: &mut ChaCha8Rng, len: usize, dist: RowDistribution) -> Vec<f64> {
    match dist {
        RowDistribution::Gaussian => gaussian_row(rng, len),
        RowDistribution::Rademacher => rademacher_row(rng, len),
    }
}

/// Floyd's algorithm: a uniform m-subset of 0..n, in insertion order.
fn sample_without_replacement(rng: &mut ChaCha8Rng, n: u128, m: usize) -> Vec<u128> {
    debug_assert!(m as u128 <= n);
    let mut chosen: HashSet<u128> = HashSet::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    for i in (n - m as u128)..n {
        let j = rng.random_range(0..=i);
        let pick = if chosen.contains(&j) { i } else { j };
        chosen.insert(pick);
        out.push(pick);
    }
    out
}

fn dense_rows(m: usize, n: usize, seed: u64, dist: RowDistribution) -> Vec<f64> {
    let mut rows = Vec::with_capacity(m * n);
    for s in 0..m {
        let mut rng = stream(seed, &[ROLE_ROW_FACTOR, s as u64, 0]);
        rows.extend(row_vector(&mut rng, n, dist));
    }
    rows
}

/// Dense sketch with i.i.d. N(0, 1/m) entries.
pub fn make_gaussian(m: usize, n: usize, seed: u64) -> Result<SketchOperator> {
    check_dims(m, n)?;
    Ok(SketchOperator {
        kind: SketchKind::Gaussian,
        m,
        input_shape: InputShape::Flat(n),
        seed,
        realization: Realization::Dense {
            rows: dense_rows(m, n, seed, RowDistribution::Gaussian),
        },
    })
}

/// Dense sketch with i.i.d. ±m^{-1/2} entries.
pub fn make_rademacher(m: usize, n: usize, seed: u64) -> Result<SketchOperator> {
    check_dims(m, n)?;
    Ok(SketchOperator {
        kind: SketchKind::Rademacher,
        m,
        input_shape: InputShape::Flat(n),
        seed,
        realization: Realization::Dense {
            rows: dense_rows(m, n, seed, RowDistribution::Rademacher),
        },
    })
}

/// Fast JL transform on the input zero-padded to `n_pad = next_pow2(n)`:
/// sign diagonal, Walsh–Hadamard mixing, and a uniform sample of m rows
/// without replacement, scaled so that `E||Sx||^2 = ||x||^2`.
pub fn make_fjlt(m: usize, n: usize, seed: u64) -> Result<SketchOperator> {
    check_dims(m, n)?;
    let n_pad = next_pow2(n);
    if m > n_pad {
        return Err(SketchError::OutputDimTooLarge { m, n_pad: n_pad as u128 });
    }
    let signs = rademacher_row(&mut stream(seed, &[ROLE_SIGN_DIAG, 0]), n_pad);
    let sampled: Vec<usize> =
        sample_without_replacement(&mut stream(seed, &[ROLE_ROW_SAMPLE]), n_pad as u128, m)
            .into_iter()
            .map(|i| i as usize)
            .collect();
    Ok(SketchOperator {
        kind: SketchKind::Fjlt,
        m,
        input_shape: InputShape::Flat(n),
        seed,
        realization: Realization::Fjlt { signs, sampled, n_pad },
    })
}

/// Khatri-Rao sketch: row s is `m^{-1/2} (a_1^(s) ⊗ ... ⊗ a_d^(s))ᵀ` with
/// independent per-mode vectors drawn row-by-row, mode-by-mode from the
/// counter-based seed stream.
pub fn make_khatri_rao(
    m: usize,
    mode_lengths: &[usize],
    dist: RowDistribution,
    seed: u64,
) -> Result<SketchOperator> {
    check_modes(m, mode_lengths)?;
    let d = mode_lengths.len();
    let mut gathers: Vec<Vec<f64>> = mode_lengths
        .iter()
        .map(|&n| Vec::with_capacity(m * n))
        .collect();
    for s in 0..m {
        for (j, &n) in mode_lengths.iter().enumerate().take(d) {
            let mut rng = stream(seed, &[ROLE_ROW_FACTOR, s as u64, j as u64]);
            gathers[j].extend(row_vector(&mut rng, n, dist));
        }
    }
    Ok(SketchOperator {
        kind: SketchKind::KhatriRao,
        m,
        input_shape: InputShape::Modes(mode_lengths.to_vec()),
        seed,
        realization: Realization::KhatriRao { gathers },
    })
}

/// Tensor product `S = S_1 ⊗ ... ⊗ S_d` of per-mode operators. The output
/// dimension is the product of the per-mode output dimensions and must stay
/// below the materialization cap (the factored path materializes the small
/// sketched tensor). Applying to a rank-r CP tensor costs the d per-mode
/// factor sketches (`O(sum_j m_j n_j r)` for dense modes) plus the
/// `O(r prod_j m_j)` materialization of the sketched tensor.
pub fn make_kronecker(mode_ops: Vec<SketchOperator>) -> Result<SketchOperator> {
    if mode_ops.is_empty() {
        return Err(SketchError::InvalidParameter(
            "kronecker product needs at least one mode operator".into(),
        ));
    }
    let mut mode_lengths = Vec::with_capacity(mode_ops.len());
    let mut m: u128 = 1;
    for op in &mode_ops {
        let n = match op.input_shape() {
            InputShape::Flat(n) => *n,
            InputShape::Modes(_) => {
                return Err(SketchError::InvalidParameter(
                    "kronecker mode operators must act on flat inputs".into(),
                ))
            }
        };
        mode_lengths.push(n);
        m *= op.m() as u128;
    }
    if m > DEFAULT_MATERIALIZE_CAP {
        return Err(SketchError::Tensor(
            tensor_core::TensorError::MaterializationCap {
                entries: m,
                cap: DEFAULT_MATERIALIZE_CAP,
            },
        ));
    }
    let seed = mode_ops[0].seed();
    Ok(SketchOperator {
        kind: SketchKind::Kronecker,
        m: m as usize,
        input_shape: InputShape::Modes(mode_lengths),
        seed,
        realization: Realization::Kronecker { ops: mode_ops },
    })
}

/// Kronecker FJLT: per-mode sign diagonals and Hadamard mixing on the padded
/// modes, then m globally sampled entries of the mixed tensor, scaled so that
/// `E||Sx||^2 = ||x||^2`. The factored path mixes the factor matrices in
/// `O(sum_j n_pad_j log(n_pad_j) r)` and evaluates each sampled entry in
/// `O(r d)`, never forming an N-length vector.
pub fn make_kfjlt(m: usize, mode_lengths: &[usize], seed: u64) -> Result<SketchOperator> {
    check_modes(m, mode_lengths)?;
    let padded: Vec<usize> = mode_lengths.iter().map(|&n| next_pow2(n)).collect();
    let n_pad = ambient_dim(&padded);
    if m as u128 > n_pad {
        return Err(SketchError::OutputDimTooLarge { m, n_pad });
    }
    let mode_signs: Vec<Vec<f64>> = padded
        .iter()
        .enumerate()
        .map(|(j, &np)| rademacher_row(&mut stream(seed, &[ROLE_SIGN_DIAG, j as u64]), np))
        .collect();
    let sampled = sample_without_replacement(&mut stream(seed, &[ROLE_ROW_SAMPLE]), n_pad, m);
    Ok(SketchOperator {
        kind: SketchKind::Kfjlt,
        m,
        input_shape: InputShape::Modes(mode_lengths.to_vec()),
        seed,
        realization: Realization::Kfjlt {
            mode_signs,
            padded,
            sampled,
        },
    })
}

/// The identity map, as a degenerate sketch (m = N).
pub fn make_identity(input_shape: InputShape) -> Result<SketchOperator> {
    let n = input_shape.ambient_dim();
    if n == 0 || n > DEFAULT_MATERIALIZE_CAP {
        return Err(SketchError::InvalidParameter(format!(
            "identity operator needs a materializable input dimension, got {n}"
        )));
    }
    Ok(SketchOperator {
        kind: SketchKind::Identity,
        m: n as usize,
        input_shape,
        seed: 0,
        realization: Realization::Identity,
    })
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(SketchError::InvalidParameter(
            "output and input dimensions must be at least 1".into(),
        ));
    }
    Ok(())
}

fn check_modes(m: usize, mode_lengths: &[usize]) -> Result<()> {
    if m == 0 {
        return Err(SketchError::InvalidParameter(
            "output dimension must be at least 1".into(),
        ));
    }
    if mode_lengths.is_empty() || mode_lengths.contains(&0) {
        return Err(SketchError::InvalidParameter(format!(
            "invalid mode lengths {mode_lengths:?}"
        )));
    }
    Ok(())
}

impl SketchOperator {
    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    /// Output dimension m.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn input_shape(&self) -> &InputShape {
        &self.input_shape
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Expected input length N (dense path).
    pub fn input_len(&self) -> u128 {
        self.input_shape.ambient_dim()
    }

    /// Applies the operator to a dense vector of length N.
    pub fn apply_dense(&self, x: &DenseVector) -> Result<DenseVector> {
        let n = self.input_len();
        if x.len() as u128 != n {
            return Err(SketchError::Shape(format!(
                "input length {} does not match operator input dimension {}",
                x.len(),
                n
            )));
        }
        let inv_sqrt_m = 1.0 / (self.m as f64).sqrt();
        match &self.realization {
            Realization::Dense { rows } => {
                let n = x.len();
                let mut y = Vec::with_capacity(self.m);
                for s in 0..self.m {
                    let row = &rows[s * n..(s + 1) * n];
                    let dot: f64 = row.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
                    y.push(dot * inv_sqrt_m);
                }
                Ok(DenseVector::new(y))
            }
            Realization::Fjlt { signs, sampled, n_pad } => {
                let mut buf = vec![0.0; *n_pad];
                for (b, (x, s)) in buf.iter_mut().zip(x.as_slice().iter().zip(signs)) {
                    *b = x * s;
                }
                fwht_in_place(&mut buf);
                Ok(DenseVector::new(
                    sampled.iter().map(|&i| buf[i] * inv_sqrt_m).collect(),
                ))
            }
            Realization::KhatriRao { gathers } => {
                let modes = self.input_shape.mode_lengths();
                let mut y = Vec::with_capacity(self.m);
                let mut cur: Vec<f64> = Vec::new();
                let mut next: Vec<f64> = Vec::new();
                for s in 0..self.m {
                    // contract the trailing (fastest) mode first; fibers of
                    // that mode are contiguous in the row-major layout
                    cur.clear();
                    cur.extend_from_slice(x.as_slice());
                    for (j, &nj) in modes.iter().enumerate().rev() {
                        let a = &gathers[j][s * nj..(s + 1) * nj];
                        next.clear();
                        for chunk in cur.chunks_exact(nj) {
                            let dot: f64 = chunk.iter().zip(a).map(|(u, v)| u * v).sum();
                            next.push(dot);
                        }
                        std::mem::swap(&mut cur, &mut next);
                    }
                    y.push(cur[0] * inv_sqrt_m);
                }
                Ok(DenseVector::new(y))
            }
            Realization::Kronecker { ops } => {
                let mut shape: Vec<usize> = self.input_shape.mode_lengths().to_vec();
                let mut data = x.as_slice().to_vec();
                for (j, op) in ops.iter().enumerate() {
                    (data, shape) = apply_along_mode(&data, &shape, j, op)?;
                }
                Ok(DenseVector::new(data))
            }
            Realization::Kfjlt {
                mode_signs,
                padded,
                sampled,
            } => {
                let modes = self.input_shape.mode_lengths();
                let mut data = pad_tensor(x.as_slice(), modes, padded);
                for (j, signs) in mode_signs.iter().enumerate() {
                    mix_mode_in_place(&mut data, padded, j, signs);
                }
                Ok(DenseVector::new(
                    sampled
                        .iter()
                        .map(|&i| data[i as usize] * inv_sqrt_m)
                        .collect(),
                ))
            }
            Realization::Identity => Ok(x.clone()),
        }
    }

    /// Applies the operator to a CP tensor through the factored path.
    ///
    /// Structured kinds never materialize the input; dense kinds fall back to
    /// materialization under the default entry cap.
    pub fn apply_cp(&self, t: &CpTensor) -> Result<DenseVector> {
        if let InputShape::Modes(modes) = &self.input_shape {
            if t.mode_lengths() != modes.as_slice() {
                return Err(SketchError::Shape(format!(
                    "tensor modes {:?} do not match operator modes {:?}",
                    t.mode_lengths(),
                    modes
                )));
            }
        } else if t.ambient_dim() != self.input_len() {
            return Err(SketchError::Shape(format!(
                "tensor ambient dimension {} does not match operator input {}",
                t.ambient_dim(),
                self.input_len()
            )));
        }
        let inv_sqrt_m = 1.0 / (self.m as f64).sqrt();
        let r = t.rank();
        match &self.realization {
            Realization::KhatriRao { gathers } => {
                let modes = t.mode_lengths();
                let d = t.order();
                // w[j][s*r + i] = <a_j^(s), A_j[:, i]>
                let mut w: Vec<Vec<f64>> = Vec::with_capacity(d);
                for (j, &nj) in modes.iter().enumerate() {
                    let mut wj = Vec::with_capacity(self.m * r);
                    for s in 0..self.m {
                        let a = &gathers[j][s * nj..(s + 1) * nj];
                        for i in 0..r {
                            let col = t.factor_column(j, i);
                            let dot: f64 = a.iter().zip(col).map(|(u, v)| u * v).sum();
                            wj.push(dot);
                        }
                    }
                    w.push(wj);
                }
                let mut y = Vec::with_capacity(self.m);
                for s in 0..self.m {
                    let mut acc = 0.0;
                    for i in 0..r {
                        let mut prod = 1.0;
                        for wj in &w {
                            prod *= wj[s * r + i];
                        }
                        acc += prod;
                    }
                    y.push(acc * inv_sqrt_m);
                }
                Ok(DenseVector::new(y))
            }
            Realization::Kronecker { ops } => {
                let mut factors = Vec::with_capacity(ops.len());
                for (j, op) in ops.iter().enumerate() {
                    let nj_out = op.m();
                    let mut fj = Vec::with_capacity(nj_out * r);
                    for i in 0..r {
                        let col = DenseVector::new(t.factor_column(j, i).to_vec());
                        fj.extend(op.apply_dense(&col)?.into_vec());
                    }
                    factors.push(fj);
                }
                let out_modes: Vec<usize> = ops.iter().map(|op| op.m()).collect();
                let sketched = CpTensor::new(out_modes, r, factors).map_err(SketchError::Tensor)?;
                Ok(sketched.materialize()?)
            }
            Realization::Kfjlt {
                mode_signs,
                padded,
                sampled,
            } => {
                let d = t.order();
                // mix factors: pad columns, flip signs, Hadamard transform
                let mut mixed: Vec<Vec<f64>> = Vec::with_capacity(d);
                for j in 0..d {
                    let np = padded[j];
                    let nj = t.mode_lengths()[j];
                    let mut fj = vec![0.0; np * r];
                    for i in 0..r {
                        let col = t.factor_column(j, i);
                        let dst = &mut fj[i * np..i * np + nj];
                        for ((dv, cv), sv) in dst.iter_mut().zip(col).zip(&mode_signs[j]) {
                            *dv = cv * sv;
                        }
                        fwht_in_place(&mut fj[i * np..(i + 1) * np]);
                    }
                    mixed.push(fj);
                }
                let mut y = Vec::with_capacity(self.m);
                for &flat in sampled {
                    let idx = multi_index(flat, padded);
                    let mut acc = 0.0;
                    for i in 0..r {
                        let mut prod = 1.0;
                        for (j, &tj) in idx.iter().enumerate() {
                            prod *= mixed[j][i * padded[j] + tj];
                        }
                        acc += prod;
                    }
                    y.push(acc * inv_sqrt_m);
                }
                Ok(DenseVector::new(y))
            }
            Realization::Dense { .. } | Realization::Fjlt { .. } | Realization::Identity => {
                let x = t.materialize()?;
                self.apply_dense(&x)
            }
        }
    }
}

/// Applies `op` to every mode-`mode` fiber of a row-major tensor, returning
/// the transformed data and the updated shape.
fn apply_along_mode(
    data: &[f64],
    shape: &[usize],
    mode: usize,
    op: &SketchOperator,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let len = shape[mode];
    let m_out = op.m();
    let inner: usize = shape[mode + 1..].iter().product();
    let outer: usize = shape[..mode].iter().product();
    let mut new_shape = shape.to_vec();
    new_shape[mode] = m_out;
    let mut out = vec![0.0; outer * m_out * inner];
    let mut fiber = vec![0.0; len];
    for o in 0..outer {
        for i in 0..inner {
            for (t, f) in fiber.iter_mut().enumerate() {
                *f = data[o * len * inner + t * inner + i];
            }
            let y = op.apply_dense(&DenseVector::new(fiber.clone()))?;
            for (t, v) in y.as_slice().iter().enumerate() {
                out[o * m_out * inner + t * inner + i] = *v;
            }
        }
    }
    Ok((out, new_shape))
}

/// Zero-pads a row-major tensor from `modes` to `padded` mode lengths.
fn pad_tensor(data: &[f64], modes: &[usize], padded: &[usize]) -> Vec<f64> {
    if modes == padded {
        return data.to_vec();
    }
    let n_out = ambient_dim(padded) as usize;
    let mut out = vec![0.0; n_out];
    for (f, &v) in data.iter().enumerate() {
        let idx = multi_index(f as u128, modes);
        out[tensor_core::flat_index(&idx, padded) as usize] = v;
    }
    out
}

/// Sign-flips then Hadamard-transforms every mode-`mode` fiber in place.
fn mix_mode_in_place(data: &mut [f64], shape: &[usize], mode: usize, signs: &[f64]) {
    let len = shape[mode];
    let inner: usize = shape[mode + 1..].iter().product();
    let outer: usize = shape[..mode].iter().product();
    let mut fiber = vec![0.0; len];
    for o in 0..outer {
        for i in 0..inner {
            for (t, f) in fiber.iter_mut().enumerate() {
                *f = data[o * len * inner + t * inner + i] * signs[t];
            }
            fwht_in_place(&mut fiber);
            for (t, f) in fiber.iter().enumerate() {
                data[o * len * inner + t * inner + i] = *f;
            }
        }
    }
}
