//! Serialization: CP tensors as JSON, dense vectors as flat JSON arrays or
//! raw little-endian f64 binary with an 8-byte length header.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{CpTensor, DenseVector, Result, TensorError};

/// Wire form of a CP tensor: factor matrices flattened column-major.
#[derive(Debug, Serialize, Deserialize)]
struct CpTensorJson {
    mode_lengths: Vec<usize>,
    rank: usize,
    factors: Vec<Vec<f64>>,
}

pub fn cp_to_json(t: &CpTensor) -> Result<String> {
    let raw = CpTensorJson {
        mode_lengths: t.mode_lengths().to_vec(),
        rank: t.rank(),
        factors: (0..t.order()).map(|j| t.factor(j).to_vec()).collect(),
    };
    Ok(serde_json::to_string(&raw)?)
}

pub fn cp_from_json(s: &str) -> Result<CpTensor> {
    let raw: CpTensorJson = serde_json::from_str(s)?;
    CpTensor::new(raw.mode_lengths, raw.rank, raw.factors)
}

pub fn dense_to_json(v: &DenseVector) -> Result<String> {
    Ok(serde_json::to_string(v.as_slice())?)
}

pub fn dense_from_json(s: &str) -> Result<DenseVector> {
    let entries: Vec<f64> = serde_json::from_str(s)?;
    Ok(DenseVector::new(entries))
}

/// Writes `v` as a u64 little-endian length followed by f64 LE entries.
pub fn write_dense_binary<W: Write>(w: &mut W, v: &DenseVector) -> Result<()> {
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for x in v.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dense_binary<R: Read>(r: &mut R) -> Result<DenseVector> {
    let mut header = [0u8; 8];
    r.read_exact(&mut header)?;
    let len = u64::from_le_bytes(header);
    if len > (isize::MAX as u64) / 8 {
        return Err(TensorError::InvalidArgument(format!(
            "binary vector header declares {len} entries"
        )));
    }
    let mut entries = Vec::with_capacity(len as usize);
    let mut buf = [0u8; 8];
    for _ in 0..len {
        r.read_exact(&mut buf)?;
        entries.push(f64::from_le_bytes(buf));
    }
    Ok(DenseVector::new(entries))
}
