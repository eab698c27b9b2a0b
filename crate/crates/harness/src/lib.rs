//! Experiment orchestration: reproducible distortion, committee-comparison,
//! and pairwise-distance experiments over configured problems, plus the
//! `varsketch` command line front end.
//!
//! Reports are deterministic functions of (config, master seed); wall-clock
//! timings and timestamps live in a separate provenance block so the result
//! payload bytes can be compared across runs. `VARSKETCH_THREADS` caps the
//! worker pool.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod points;

use std::sync::Once;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Tensor(#[from] tensor_core::TensorError),
    #[error(transparent)]
    Sketch(#[from] sketch_ops::SketchError),
    #[error(transparent)]
    Median(#[from] median_sketch::MedianSketchError),
    #[error(transparent)]
    Bounds(#[from] bounds::BoundsError),
    #[error(transparent)]
    Poly(#[from] polyapprox::PolyError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

static THREAD_INIT: Once = Once::new();

/// Applies the VARSKETCH_THREADS cap to the global worker pool, once.
pub fn init_threads() {
    THREAD_INIT.call_once(|| {
        if let Ok(v) = std::env::var("VARSKETCH_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global();
                }
            }
        }
    });
}

/// FNV-1a 64 over the canonical JSON encoding, as a stable config fingerprint.
pub fn config_hash(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
