//! Experiment drivers. All randomness is derived from the config's master
//! seed via labeled streams (trial index, role), so paired experiment arms
//! share point sets while drawing independent operator randomness, and every
//! result payload is reproducible byte for byte.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use median_sketch::{member_seed, Committee, DistanceMatrix};
use sketch_ops::seed::derive_seed;
use sketch_ops::SketchKind;
use tensor_core::{cp_difference, cp_norm_sq, CpTensor, DEFAULT_MATERIALIZE_CAP};

use crate::config::ExperimentConfig;
use crate::points::sample_points;
use crate::{config_hash, init_threads, Result};

const ROLE_TARGET: u64 = 0x20;
const ROLE_TRIAL_POINTS: u64 = 0x21;
const ROLE_TRIAL_OPERATOR: u64 = 0x22;
const ROLE_ONESHOT_POINTS: u64 = 0x23;
const ROLE_ONESHOT_OPERATOR: u64 = 0x24;

pub const SCHEMA_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// report plumbing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q90: f64,
    pub q99: f64,
    pub max: f64,
}

impl Quantiles {
    fn from_samples(samples: &[f64]) -> Self {
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let q = |p: f64| {
            if s.is_empty() {
                return f64::NAN;
            }
            let idx = ((s.len() - 1) as f64 * p).round() as usize;
            s[idx]
        };
        Self {
            min: q(0.0),
            q25: q(0.25),
            q50: q(0.5),
            q75: q(0.75),
            q90: q(0.9),
            q99: q(0.99),
            max: q(1.0),
        }
    }
}

/// 99% Wilson score interval for a binomial rate.
pub fn wilson_ci99(successes: u64, total: u64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let z = 2.5758293035489004f64;
    let n = total as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z2 / (4.0 * n)) / n).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Non-deterministic per-run context: everything here is excluded from the
/// reproducibility contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub timestamp_secs: u64,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    /// Wall-clock seconds of the factored sketch phase (one trial).
    pub factored_secs: f64,
    /// Dense materialize-then-apply seconds on the same workload, when the
    /// problem is materializable.
    pub dense_secs: Option<f64>,
}

fn provenance(timings: Timings) -> Provenance {
    Provenance {
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_secs: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        timings,
    }
}

// ---------------------------------------------------------------------------
// distortion
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub results: DistortionResults,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionResults {
    pub trials: u64,
    pub points_per_trial: u64,
    pub epsilon: f64,
    /// Trials where some sampled point exceeded distortion epsilon.
    pub failure_count: u64,
    pub failure_rate: f64,
    pub failure_ci99: (f64, f64),
    /// Quantiles of the per-trial maximum sampled distortion.
    pub per_trial_max: Quantiles,
    /// Quantiles over every (trial, point) distortion sample.
    pub sampled_distortion: Quantiles,
}

/// Runs the sampled-distortion experiment: per trial, fresh derived seeds for
/// the point set and the committee, distortions measured against exact norms.
pub fn run_distortion(config: &ExperimentConfig) -> Result<DistortionReport> {
    init_threads();
    config.validate()?;
    let spec = config.operator_spec()?;
    let target_seed = derive_seed(config.seed, &[ROLE_TARGET]);

    let per_trial: Vec<Vec<f64>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let pts = sample_points(
                &config.problem,
                derive_seed(config.seed, &[ROLE_TRIAL_POINTS, t]),
                target_seed,
            )?;
            let committee = Committee::from_spec(
                &spec,
                config.committee_k,
                derive_seed(config.seed, &[ROLE_TRIAL_OPERATOR, t]),
            )?;
            Ok(committee.distortion(&pts)?)
        })
        .collect::<Result<_>>()?;

    let eps = config.epsilon;
    let per_trial_max: Vec<f64> = per_trial
        .iter()
        .map(|d| d.iter().cloned().fold(0.0, f64::max))
        .collect();
    let failure_count = per_trial_max.iter().filter(|&&m| m > eps).count() as u64;
    let all: Vec<f64> = per_trial.iter().flatten().cloned().collect();

    let timings = time_paths(config, &spec, target_seed)?;

    let config_json = serde_json::to_vec(config)?;
    Ok(DistortionReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        config_hash: config_hash(&config_json),
        results: DistortionResults {
            trials: config.trials as u64,
            points_per_trial: config.problem.points as u64,
            epsilon: eps,
            failure_count,
            failure_rate: failure_count as f64 / config.trials as f64,
            failure_ci99: wilson_ci99(failure_count, config.trials as u64),
            per_trial_max: Quantiles::from_samples(&per_trial_max),
            sampled_distortion: Quantiles::from_samples(&all),
        },
        provenance: provenance(timings),
    })
}

/// Times the factored sketch phase against materialize-then-dense on the
/// trial-0 workload.
fn time_paths(
    config: &ExperimentConfig,
    spec: &sketch_ops::OperatorSpec,
    target_seed: u64,
) -> Result<Timings> {
    let pts = sample_points(
        &config.problem,
        derive_seed(config.seed, &[ROLE_TRIAL_POINTS, 0]),
        target_seed,
    )?;
    let committee = Committee::from_spec(
        spec,
        config.committee_k,
        derive_seed(config.seed, &[ROLE_TRIAL_OPERATOR, 0]),
    )?;

    let t0 = Instant::now();
    for p in &pts {
        for op in committee.members() {
            let _ = op.apply_cp(p)?;
        }
    }
    let factored_secs = t0.elapsed().as_secs_f64();

    let n = tensor_core::ambient_dim(&config.problem.mode_lengths);
    let structured = matches!(
        config.operator.kind,
        SketchKind::KhatriRao | SketchKind::Kronecker | SketchKind::Kfjlt
    );
    let dense_secs = if structured && n <= DEFAULT_MATERIALIZE_CAP {
        let t1 = Instant::now();
        for p in &pts {
            let x = p.materialize()?;
            for op in committee.members() {
                let _ = op.apply_dense(&x)?;
            }
        }
        Some(t1.elapsed().as_secs_f64())
    } else {
        None
    };
    Ok(Timings {
        factored_secs,
        dense_secs,
    })
}

// ---------------------------------------------------------------------------
// committee comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub results: CompareResults,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResults {
    pub trials: u64,
    pub epsilon: f64,
    /// Base member dimension m0 and committee size 2k+1.
    pub base_m: u64,
    pub committee_size: u64,
    /// Equal-budget single sketch dimension m0 (2k+1).
    pub single_m: u64,
    pub committee_failures: u64,
    pub single_failures: u64,
    pub committee_rate: f64,
    pub single_rate: f64,
    pub committee_ci99: (f64, f64),
    pub single_ci99: (f64, f64),
    /// Discordant trial counts: single-only failures, committee-only failures.
    pub single_only: u64,
    pub committee_only: u64,
    /// One-sided McNemar statistic (single_only - committee_only) / sqrt(sum).
    pub mcnemar_z: f64,
}

/// Paired comparison at equal total measurements: a median committee of 2k+1
/// sketches of dimension m0 against a single sketch of dimension m0 (2k+1),
/// on shared per-trial point sets. With k = 0 both arms are the same operator
/// by construction (the single arm reuses member 0's derived seed).
pub fn run_committee_compare(config: &ExperimentConfig) -> Result<CompareReport> {
    init_threads();
    config.validate()?;
    let k = config.committee_k;
    let size = 2 * k + 1;
    let m0 = config.operator.m;
    let committee_spec = config.operator_spec()?;
    let single_spec = config.operator_spec_with_m(m0 * size)?;
    let target_seed = derive_seed(config.seed, &[ROLE_TARGET]);
    let eps = config.epsilon;

    let t0 = Instant::now();
    let outcomes: Vec<(bool, bool)> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let pts = sample_points(
                &config.problem,
                derive_seed(config.seed, &[ROLE_TRIAL_POINTS, t]),
                target_seed,
            )?;
            let op_master = derive_seed(config.seed, &[ROLE_TRIAL_OPERATOR, t]);
            let committee = Committee::from_spec(&committee_spec, k, op_master)?;
            let single = Committee::from_ops(vec![single_spec
                .with_seed(member_seed(op_master, 0))
                .build()?])?;

            let cfail = committee.distortion(&pts)?.iter().any(|&e| e > eps);
            let sfail = single.distortion(&pts)?.iter().any(|&e| e > eps);
            Ok((cfail, sfail))
        })
        .collect::<Result<_>>()?;
    let elapsed = t0.elapsed().as_secs_f64();

    let trials = config.trials as u64;
    let committee_failures = outcomes.iter().filter(|(c, _)| *c).count() as u64;
    let single_failures = outcomes.iter().filter(|(_, s)| *s).count() as u64;
    let single_only = outcomes.iter().filter(|(c, s)| *s && !*c).count() as u64;
    let committee_only = outcomes.iter().filter(|(c, s)| *c && !*s).count() as u64;
    let discordant = single_only + committee_only;
    let mcnemar_z = if discordant == 0 {
        0.0
    } else {
        (single_only as f64 - committee_only as f64) / (discordant as f64).sqrt()
    };

    let config_json = serde_json::to_vec(config)?;
    Ok(CompareReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        config_hash: config_hash(&config_json),
        results: CompareResults {
            trials,
            epsilon: eps,
            base_m: m0 as u64,
            committee_size: size as u64,
            single_m: (m0 * size) as u64,
            committee_failures,
            single_failures,
            committee_rate: committee_failures as f64 / trials as f64,
            single_rate: single_failures as f64 / trials as f64,
            committee_ci99: wilson_ci99(committee_failures, trials),
            single_ci99: wilson_ci99(single_failures, trials),
            single_only,
            committee_only,
            mcnemar_z,
        },
        provenance: provenance(Timings {
            factored_secs: elapsed,
            dense_secs: None,
        }),
    })
}

// ---------------------------------------------------------------------------
// pairwise distances
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub results: PairwiseResults,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseResults {
    pub points: u64,
    /// Max over pairs of |estimated/exact - 1|, over nonzero exact distances.
    pub max_rel_error: f64,
    pub point_ids: Vec<String>,
}

pub struct PairwiseOutput {
    pub report: PairwiseReport,
    pub matrix: DistanceMatrix,
    pub csv: String,
}

/// One-shot pairwise distance estimation with exact CP-norm reference
/// distances.
pub fn run_pairwise(config: &ExperimentConfig) -> Result<PairwiseOutput> {
    init_threads();
    config.validate()?;
    if config.problem.points < 2 {
        return Err(crate::HarnessError::Config(
            "pairwise needs at least 2 points".into(),
        ));
    }
    let spec = config.operator_spec()?;
    let target_seed = derive_seed(config.seed, &[ROLE_TARGET]);
    let pts = sample_points(
        &config.problem,
        derive_seed(config.seed, &[ROLE_ONESHOT_POINTS]),
        target_seed,
    )?;
    let committee = Committee::from_spec(
        &spec,
        config.committee_k,
        derive_seed(config.seed, &[ROLE_ONESHOT_OPERATOR]),
    )?;

    let t0 = Instant::now();
    let matrix = committee.pairwise_distances(&pts)?;
    let elapsed = t0.elapsed().as_secs_f64();

    let max_rel_error = max_relative_error(&matrix, &pts)?;
    let point_ids: Vec<String> = (0..pts.len()).map(|i| format!("p{i}")).collect();
    let csv = matrix.to_csv(&point_ids);

    let config_json = serde_json::to_vec(config)?;
    Ok(PairwiseOutput {
        report: PairwiseReport {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            config_hash: config_hash(&config_json),
            results: PairwiseResults {
                points: pts.len() as u64,
                max_rel_error,
                point_ids,
            },
            provenance: provenance(Timings {
                factored_secs: elapsed,
                dense_secs: None,
            }),
        },
        matrix,
        csv,
    })
}

fn max_relative_error(matrix: &DistanceMatrix, pts: &[CpTensor]) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let exact = cp_norm_sq(&cp_difference(&pts[i], &pts[j])?).sqrt();
            if exact > 0.0 {
                worst = worst.max((matrix.get(i, j) / exact - 1.0).abs());
            }
        }
    }
    Ok(worst)
}
