//! Point-set sampling. Every family is a sampled surrogate for the infinite
//! set the guarantees quantify over; reports label results accordingly.

use sketch_ops::seed::derive_seed;
use tensor_core::{cp_difference, random_unit_cp, CpTensor, FactorDistribution};

use crate::config::{PointFamily, ProblemConfig};
use crate::Result;

const ROLE_POINT: u64 = 0x10;
const ROLE_PAIR: u64 = 0x11;

/// Samples the configured point family. `points_seed` varies per trial;
/// `target_seed` stays fixed so the residual family shares one target.
pub fn sample_points(
    problem: &ProblemConfig,
    points_seed: u64,
    target_seed: u64,
) -> Result<Vec<CpTensor>> {
    let modes = &problem.mode_lengths;
    let r = problem.rank;
    let mut out = Vec::with_capacity(problem.points);
    match problem.family {
        PointFamily::RandomUnitCp => {
            for i in 0..problem.points {
                out.push(random_unit_cp(
                    modes,
                    r,
                    FactorDistribution::Gaussian,
                    derive_seed(points_seed, &[ROLE_POINT, i as u64]),
                )?);
            }
        }
        PointFamily::CpDifferences => {
            for i in 0..problem.points {
                let a = random_unit_cp(
                    modes,
                    r,
                    FactorDistribution::Gaussian,
                    derive_seed(points_seed, &[ROLE_PAIR, i as u64, 0]),
                )?;
                let b = random_unit_cp(
                    modes,
                    r,
                    FactorDistribution::Gaussian,
                    derive_seed(points_seed, &[ROLE_PAIR, i as u64, 1]),
                )?;
                out.push(cp_difference(&a, &b)?);
            }
        }
        PointFamily::FixedTargetResiduals => {
            let target = random_unit_cp(
                modes,
                problem.target_rank.unwrap_or(r),
                FactorDistribution::Gaussian,
                target_seed,
            )?;
            for i in 0..problem.points {
                let m = random_unit_cp(
                    modes,
                    r,
                    FactorDistribution::Gaussian,
                    derive_seed(points_seed, &[ROLE_POINT, i as u64]),
                )?;
                out.push(cp_difference(&m, &target)?);
            }
        }
    }
    Ok(out)
}
