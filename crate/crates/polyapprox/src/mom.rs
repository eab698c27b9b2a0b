//! Median-of-means tail bound and its Monte Carlo validation.
//!
//! For i.i.d. `X_1, ..., X_{2k+1}` with `Pr(X <= a) <= p` and
//! `Pr(X >= b) <= p`, the median leaves `[a, b]` with probability at most
//! `(4p)^{k+1} / sqrt(pi (k + 1/4))`. The Monte Carlo check draws from the
//! extremal three-atom distribution `{a-1, (a+b)/2, b+1}` with masses
//! `{p, 1-2p, p}`, for which the failure event reduces to one side holding
//! at least `k+1` of the `2k+1` draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{PolyError, Result};

/// `(4p)^{k+1} / sqrt(pi (k + 1/4))`, clamped to [0, 1].
pub fn mom_tail_bound(p: f64, k: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(PolyError::InvalidParameter(format!(
            "tail mass p = {p} not in [0, 1]"
        )));
    }
    let bound = (4.0 * p).powi(k as i32 + 1) / (std::f64::consts::PI * (k as f64 + 0.25)).sqrt();
    Ok(bound.clamp(0.0, 1.0))
}

/// Exact failure rate of the median over the three-atom distribution:
/// `2 * Pr(Binomial(2k+1, p) >= k+1)` (the two one-sided events are disjoint).
pub fn mom_exact_rate(p: f64, k: u32) -> Result<f64> {
    if !(0.0..=0.5).contains(&p) {
        return Err(PolyError::InvalidParameter(format!(
            "atom mass p = {p} not in [0, 1/2]"
        )));
    }
    let n = 2 * k as u64 + 1;
    let mut tail = 0.0;
    for l in (k as u64 + 1)..=n {
        tail += binomial_pmf(n, l, p);
    }
    Ok((2.0 * tail).min(1.0))
}

fn binomial_pmf(n: u64, l: u64, p: f64) -> f64 {
    let mut log_c = 0.0;
    for i in 0..l {
        log_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    (log_c + l as f64 * p.ln() + (n - l) as f64 * (1.0 - p).ln()).exp()
}

#[derive(Debug, Clone, Copy)]
pub struct MomEstimate {
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub bound: f64,
    /// Half-width of the 99% normal-approximation confidence interval.
    pub ci99_half_width: f64,
}

fn mix(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Empirical failure rate of the median over `trials` draws of `2k+1`
/// three-atom samples. Deterministic given `seed`; trials run in parallel
/// over fixed-size chunks with derived seeds.
pub fn mom_monte_carlo(p: f64, k: u32, trials: u64, seed: u64) -> Result<MomEstimate> {
    if !(0.0..=0.5).contains(&p) {
        return Err(PolyError::InvalidParameter(format!(
            "atom mass p = {p} not in [0, 1/2]"
        )));
    }
    if trials < 1000 {
        return Err(PolyError::InvalidParameter(format!(
            "need at least 1000 trials, got {trials}"
        )));
    }
    let draws = 2 * k as u64 + 1;
    const CHUNK: u64 = 4096;
    let chunks = trials.div_ceil(CHUNK);
    let failures: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, c));
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(trials);
            let mut fails = 0u64;
            for _ in lo..hi {
                let mut low = 0u64;
                let mut high = 0u64;
                for _ in 0..draws {
                    let u: f64 = rng.random();
                    if u < p {
                        low += 1;
                    } else if u >= 1.0 - p {
                        high += 1;
                    }
                }
                // median below a iff at least k+1 draws hit the low atom
                if low > k as u64 || high > k as u64 {
                    fails += 1;
                }
            }
            fails
        })
        .sum();
    let rate = failures as f64 / trials as f64;
    let ci99_half_width = 2.5758293035489004 * (rate * (1.0 - rate) / trials as f64).sqrt();
    Ok(MomEstimate {
        trials,
        failures,
        rate,
        bound: mom_tail_bound(p, k)?,
        ci99_half_width,
    })
}
