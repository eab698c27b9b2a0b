use serde::{Deserialize, Serialize};

use sketch_ops::{InputShape, OperatorSpec, RowDistribution, SketchKind};
use tensor_core::{ambient_dim, DEFAULT_MATERIALIZE_CAP};

use crate::{HarnessError, Result};

/// Dense operator kinds store m x N entries; keep them desk-sized.
const DENSE_ENTRY_LIMIT: u128 = 1 << 27;

fn default_schema_version() -> u32 {
    1
}

fn default_trials() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub problem: ProblemConfig,
    pub operator: OperatorConfig,
    /// Committee half-size; 2k+1 members (0 = a single sketch).
    #[serde(default)]
    pub committee_k: usize,
    pub epsilon: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub mode_lengths: Vec<usize>,
    pub rank: usize,
    /// Points sampled per trial.
    pub points: usize,
    pub family: PointFamily,
    /// Rank of the fixed target tensor (defaults to `rank`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_rank: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFamily {
    /// Unit-norm random CP tensors of the configured rank.
    RandomUnitCp,
    /// Differences of unit-norm random CP pairs (rank bound 2r).
    CpDifferences,
    /// Residuals against one fixed random target tensor.
    FixedTargetResiduals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub kind: SketchKind,
    #[serde(default)]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_distribution: Option<RowDistribution>,
    /// Per-mode output dimensions and kinds for the Kronecker kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_ops: Option<Vec<ModeOpConfig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeOpConfig {
    pub kind: SketchKind,
    pub m: usize,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != 1 {
            return Err(HarnessError::Config(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let p = &self.problem;
        if p.mode_lengths.is_empty() || p.mode_lengths.contains(&0) {
            return Err(HarnessError::Config(format!(
                "invalid mode lengths {:?}",
                p.mode_lengths
            )));
        }
        if p.points == 0 {
            return Err(HarnessError::Config("need at least one point".into()));
        }
        if p.rank == 0 {
            return Err(HarnessError::Config("rank must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(HarnessError::Config(format!(
                "epsilon {} not in (0, 1)",
                self.epsilon
            )));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        let n = ambient_dim(&p.mode_lengths);
        let op = &self.operator;
        match op.kind {
            SketchKind::Gaussian | SketchKind::Rademacher => {
                if op.m == 0 {
                    return Err(HarnessError::Config("operator m must be positive".into()));
                }
                if n > DEFAULT_MATERIALIZE_CAP || op.m as u128 * n > DENSE_ENTRY_LIMIT {
                    return Err(HarnessError::Config(format!(
                        "dense operator of {} x {n} entries is beyond the desk-scale limit",
                        op.m
                    )));
                }
            }
            SketchKind::Fjlt => {
                if op.m == 0 {
                    return Err(HarnessError::Config("operator m must be positive".into()));
                }
                if n > DEFAULT_MATERIALIZE_CAP {
                    return Err(HarnessError::Config(
                        "fjlt needs a materializable input".into(),
                    ));
                }
            }
            SketchKind::KhatriRao | SketchKind::Kfjlt => {
                if op.m == 0 {
                    return Err(HarnessError::Config("operator m must be positive".into()));
                }
            }
            SketchKind::Kronecker => {
                let subs = op.mode_ops.as_ref().ok_or_else(|| {
                    HarnessError::Config("kronecker operator needs mode_ops".into())
                })?;
                if subs.len() != p.mode_lengths.len() {
                    return Err(HarnessError::Config(format!(
                        "kronecker has {} mode_ops for {} modes",
                        subs.len(),
                        p.mode_lengths.len()
                    )));
                }
                if subs.iter().any(|s| {
                    matches!(s.kind, SketchKind::Kronecker | SketchKind::KhatriRao | SketchKind::Kfjlt)
                }) {
                    return Err(HarnessError::Config(
                        "kronecker mode operators must be flat-input kinds".into(),
                    ));
                }
            }
            SketchKind::Identity => {
                if n > DEFAULT_MATERIALIZE_CAP {
                    return Err(HarnessError::Config(
                        "identity operator needs a materializable input".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The operator spec this config describes (seed filled in later through
    /// `with_seed` by the experiment driver).
    pub fn operator_spec(&self) -> Result<OperatorSpec> {
        self.operator_spec_with_m(self.operator.m)
    }

    /// Same spec at an overridden output dimension (equal-budget baselines).
    pub fn operator_spec_with_m(&self, m: usize) -> Result<OperatorSpec> {
        let modes = &self.problem.mode_lengths;
        let n = ambient_dim(modes);
        let op = &self.operator;
        let spec = match op.kind {
            SketchKind::Gaussian | SketchKind::Rademacher | SketchKind::Fjlt => OperatorSpec {
                kind: op.kind,
                m,
                input_shape: InputShape::Flat(n as usize),
                seed: 0,
                row_distribution: None,
                mode_ops: None,
            },
            SketchKind::KhatriRao => OperatorSpec {
                kind: op.kind,
                m,
                input_shape: InputShape::Modes(modes.clone()),
                seed: 0,
                row_distribution: Some(op.row_distribution.unwrap_or(RowDistribution::Gaussian)),
                mode_ops: None,
            },
            SketchKind::Kfjlt => OperatorSpec {
                kind: op.kind,
                m,
                input_shape: InputShape::Modes(modes.clone()),
                seed: 0,
                row_distribution: None,
                mode_ops: None,
            },
            SketchKind::Kronecker => {
                let subs = op
                    .mode_ops
                    .as_ref()
                    .ok_or_else(|| HarnessError::Config("kronecker needs mode_ops".into()))?;
                let mode_specs: Vec<OperatorSpec> = subs
                    .iter()
                    .zip(modes)
                    .map(|(s, &nj)| OperatorSpec {
                        kind: s.kind,
                        m: if s.kind == SketchKind::Identity { nj } else { s.m },
                        input_shape: InputShape::Flat(nj),
                        seed: 0,
                        row_distribution: None,
                        mode_ops: None,
                    })
                    .collect();
                OperatorSpec {
                    kind: SketchKind::Kronecker,
                    m: 0,
                    input_shape: InputShape::Modes(modes.clone()),
                    seed: 0,
                    row_distribution: None,
                    mode_ops: Some(mode_specs),
                }
            }
            SketchKind::Identity => OperatorSpec {
                kind: SketchKind::Identity,
                m: n as usize,
                input_shape: InputShape::Modes(modes.clone()),
                seed: 0,
                row_distribution: None,
                mode_ops: None,
            },
        };
        Ok(spec)
    }
}
