//! Committee-based median sketching.
//!
//! A committee holds `2k+1` independent sketch operators with a shared
//! `(kind, m, input_shape)` and seeds derived from a master seed. Sketching a
//! point applies every member and keeps the output whose norm is the median
//! of the member norms; ties select the smallest member index. The resulting
//! map is piecewise linear but still scaling-homogeneous, which is what the
//! pairwise distance estimator relies on.
//!
//! Pairwise distances over a point set are computed from per-point profiles
//! (one sketched vector per member), so each point is sketched exactly once
//! and the distance phase costs `O(k m P^2)`.

use std::io::{Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use sketch_ops::{OperatorSpec, SketchError, SketchOperator, Sketchable};
use tensor_core::{DenseVector, TensorError};

/// Stream label for committee member seed derivation.
const ROLE_COMMITTEE_MEMBER: u64 = 0x05;

#[derive(Debug, Error)]
pub enum MedianSketchError {
    #[error("argmed needs an odd-length nonempty list, got {0}")]
    BadMedianInput(usize),
    #[error("committee members must share (kind, m, input shape)")]
    MixedCommittee,
    #[error("point {index} has zero exact norm")]
    ZeroNormPoint { index: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, MedianSketchError>;

/// Index of the median of an odd-length list; ties among median-valued
/// entries resolve to the smallest index.
pub fn argmed(values: &[f64]) -> Result<usize> {
    if values.is_empty() || values.len().is_multiple_of(2) {
        return Err(MedianSketchError::BadMedianInput(values.len()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[values.len() / 2];
    Ok(values
        .iter()
        .position(|&v| v == median)
        .expect("median value comes from the list"))
}

/// Derived seed of committee member `index` under `master_seed`.
pub fn member_seed(master_seed: u64, index: usize) -> u64 {
    sketch_ops::seed::derive_seed(master_seed, &[ROLE_COMMITTEE_MEMBER, index as u64])
}

/// A committee of `2k+1` independent sketch operators sharing output
/// dimension and input shape.
#[derive(Debug, Clone)]
pub struct Committee {
    ops: Vec<SketchOperator>,
    k: usize,
}

impl Committee {
    /// Builds `2k+1` members from a spec, overriding its seed with seeds
    /// derived from `master_seed`.
    pub fn from_spec(spec: &OperatorSpec, k: usize, master_seed: u64) -> Result<Self> {
        let mut ops = Vec::with_capacity(2 * k + 1);
        for i in 0..2 * k + 1 {
            ops.push(spec.with_seed(member_seed(master_seed, i)).build()?);
        }
        Self::from_ops(ops)
    }

    /// Wraps explicit member operators; they must agree on kind, output
    /// dimension and input shape, and the count must be odd.
    pub fn from_ops(ops: Vec<SketchOperator>) -> Result<Self> {
        if ops.is_empty() || ops.len().is_multiple_of(2) {
            return Err(MedianSketchError::BadMedianInput(ops.len()));
        }
        let first = &ops[0];
        if ops.iter().any(|op| {
            op.kind() != first.kind()
                || op.m() != first.m()
                || op.input_shape() != first.input_shape()
        }) {
            return Err(MedianSketchError::MixedCommittee);
        }
        let k = (ops.len() - 1) / 2;
        Ok(Self { ops, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> usize {
        self.ops.len()
    }

    /// Output dimension m shared by all members.
    pub fn m(&self) -> usize {
        self.ops[0].m()
    }

    pub fn members(&self) -> &[SketchOperator] {
        &self.ops
    }

    /// Algorithm: sketch with every member, return the output of the member
    /// whose norm is the median (smallest index on ties).
    pub fn median_sketch<P: Sketchable>(&self, x: &P) -> Result<DenseVector> {
        Ok(self.median_sketch_indexed(x)?.1)
    }

    /// As [`median_sketch`](Self::median_sketch), also returning the selected
    /// member index.
    pub fn median_sketch_indexed<P: Sketchable>(&self, x: &P) -> Result<(usize, DenseVector)> {
        let ys = self.member_sketches(x)?;
        // squared norms select the same index as norms (monotone)
        let norms_sq: Vec<f64> = ys.iter().map(DenseVector::norm_sq).collect();
        let i = argmed(&norms_sq)?;
        Ok((i, ys.into_iter().nth(i).expect("argmed index in range")))
    }

    /// All member sketches of one point, in member order.
    pub fn member_sketches<P: Sketchable>(&self, x: &P) -> Result<Vec<DenseVector>> {
        self.ops.iter().map(|op| Ok(x.sketch(op)?)).collect()
    }

    /// Per-point relative distortions `| ||med(x)||^2 / ||x||^2 - 1 |`
    /// of the median sketch against the exact norm.
    pub fn distortion<P: Sketchable + Sync>(&self, points: &[P]) -> Result<Vec<f64>>
    where
        Self: Sync,
    {
        for (index, p) in points.iter().enumerate() {
            if p.norm_sq_exact() == 0.0 {
                return Err(MedianSketchError::ZeroNormPoint { index });
            }
        }
        points
            .par_iter()
            .map(|p| {
                let y = self.median_sketch(p)?;
                Ok((y.norm_sq() / p.norm_sq_exact() - 1.0).abs())
            })
            .collect()
    }

    /// Pairwise distance estimation: sketches every point once
    /// into a `(2k+1) x m` profile, then takes the median member distance per
    /// pair. The result has an exactly zero diagonal and is exactly symmetric.
    pub fn pairwise_distances<P: Sketchable + Sync>(&self, points: &[P]) -> Result<DistanceMatrix> {
        let profiles = self.profiles(points)?;
        self.pairwise_from_profiles(&profiles)
    }

    /// Sketch phase: the concatenated member sketches of each point.
    pub fn profiles<P: Sketchable + Sync>(&self, points: &[P]) -> Result<Vec<Vec<f64>>> {
        points
            .par_iter()
            .map(|p| {
                let mut prof = Vec::with_capacity(self.size() * self.m());
                for y in self.member_sketches(p)? {
                    prof.extend(y.into_vec());
                }
                Ok(prof)
            })
            .collect()
    }

    /// Distance phase over precomputed profiles.
    pub fn pairwise_from_profiles(&self, profiles: &[Vec<f64>]) -> Result<DistanceMatrix> {
        let m = self.m();
        let members = self.size();
        for (i, prof) in profiles.iter().enumerate() {
            if prof.len() != members * m {
                return Err(MedianSketchError::Shape(format!(
                    "profile {i} has {} entries, expected {}",
                    prof.len(),
                    members * m
                )));
            }
        }
        let p = profiles.len();
        let pairs: Vec<(usize, usize)> = (0..p)
            .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
            .collect();
        let dists: Vec<((usize, usize), f64)> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let mut norms_sq = Vec::with_capacity(members);
                for s in 0..members {
                    let yi = &profiles[i][s * m..(s + 1) * m];
                    let yj = &profiles[j][s * m..(s + 1) * m];
                    let d2: f64 = yi
                        .iter()
                        .zip(yj)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    norms_sq.push(d2);
                }
                let s = argmed(&norms_sq)?;
                Ok(((i, j), norms_sq[s].sqrt()))
            })
            .collect::<Result<_>>()?;
        let mut matrix = DistanceMatrix::zeros(p);
        for ((i, j), d) in dists {
            matrix.set_symmetric(i, j, d);
        }
        Ok(matrix)
    }
}

/// A symmetric P x P distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            values: vec![0.0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    fn set_symmetric(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.size + j] = v;
        self.values[j * self.size + i] = v;
    }

    /// CSV with a header row of point identifiers and one labeled row per point.
    pub fn to_csv(&self, ids: &[String]) -> String {
        let mut out = String::from("id");
        for id in ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (i, id) in ids.iter().enumerate().take(self.size) {
            out.push_str(id);
            for j in 0..self.size {
                out.push(',');
                out.push_str(&format!("{:.17e}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

/// Dumps profiles as consecutive binary vectors (tensor-core wire format).
pub fn write_profiles<W: Write>(w: &mut W, profiles: &[Vec<f64>]) -> Result<()> {
    for prof in profiles {
        tensor_core::io::write_dense_binary(w, &DenseVector::new(prof.clone()))?;
    }
    Ok(())
}

/// Reads `count` profile records written by [`write_profiles`].
pub fn read_profiles<R: Read>(r: &mut R, count: usize) -> Result<Vec<Vec<f64>>> {
    (0..count)
        .map(|_| Ok(tensor_core::io::read_dense_binary(r)?.into_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmed_basic() {
        assert_eq!(argmed(&[0.9, 1.0, 1.1]).unwrap(), 1);
        assert_eq!(argmed(&[1.1, 1.0, 0.9]).unwrap(), 1);
        assert_eq!(argmed(&[1.0, 1.0, 1.0]).unwrap(), 0);
    }

    #[test]
    fn argmed_rejects_even_or_empty() {
        assert!(argmed(&[]).is_err());
        assert!(argmed(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn argmed_matches_sort_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let vals: Vec<f64> = (0..7).map(|_| rng.random::<f64>()).collect();
            let got = argmed(&vals).unwrap();
            // oracle: full sort, median value, first matching index
            let mut sorted = vals.clone();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[3];
            let want = vals.iter().position(|&v| v == median).unwrap();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn member_seeds_distinct() {
        let seeds: Vec<u64> = (0..101).map(|i| member_seed(12345, i)).collect();
        let unique: std::collections::HashSet<u64> = seeds.iter().copied().collect();
        assert_eq!(unique.len(), seeds.len());
    }
}
