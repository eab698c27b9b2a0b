//! Acceptance suite: one test per criterion, each ending in a summary line.
//!
//! Run with `cargo test -p harness --test acceptance -- --nocapture` to see
//! the per-criterion pass lines alongside the test harness output.

use std::time::Instant;

use harness::config::{ExperimentConfig, OperatorConfig, PointFamily, ProblemConfig};
use harness::experiments::{run_committee_compare, run_distortion};
use median_sketch::{argmed, Committee};
use sketch_ops::{
    make_fjlt, make_gaussian, make_khatri_rao, make_kfjlt, make_kronecker, InputShape,
    OperatorSpec, RowDistribution, SketchKind, SketchOperator,
};
use tensor_core::{cp_difference, random_cp, random_unit_cp, CpTensor, DenseVector, FactorDistribution};

fn rel_discrepancy(a: &DenseVector, b: &DenseVector) -> f64 {
    let diff: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    diff.sqrt() / b.norm().max(1e-300)
}

/// Criterion 1: factored/dense oracle equivalence for the structured kinds
/// over 100 seeded random CP tensors each, N <= 4096, within 1e-10, < 30 s.
#[test]
fn criterion_01_factored_dense_equivalence() {
    let t0 = Instant::now();
    let modes = [8usize, 8, 8]; // N = 512
    let make_ops = |seed: u64| -> Vec<SketchOperator> {
        vec![
            make_khatri_rao(64, &modes, RowDistribution::Gaussian, seed).unwrap(),
            make_kronecker(vec![
                make_gaussian(4, 8, seed * 3 + 1).unwrap(),
                make_gaussian(4, 8, seed * 3 + 2).unwrap(),
                make_gaussian(4, 8, seed * 3 + 3).unwrap(),
            ])
            .unwrap(),
            make_kfjlt(64, &modes, seed).unwrap(),
        ]
    };
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let t = random_cp(&modes, 3, FactorDistribution::Gaussian, 10_000 + i).unwrap();
        let x = t.materialize().unwrap();
        for op in make_ops(i) {
            let fast = op.apply_cp(&t).unwrap();
            let dense = op.apply_dense(&x).unwrap();
            worst = worst.max(rel_discrepancy(&fast, &dense));
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(worst <= 1e-10, "worst discrepancy {worst}");
    assert!(elapsed < 30.0, "took {elapsed:.1}s");
    println!("[PASS] criterion 1: factored/dense equivalence (worst {worst:.2e}, {elapsed:.2}s)");
}

/// Criterion 2: the FJLT fast path equals its materialized matrix on
/// N in {8, 64}, within 1e-10, < 5 s.
#[test]
fn criterion_02_fjlt_matches_materialized_matrix() {
    let t0 = Instant::now();
    for (n, m) in [(8usize, 8usize), (64, 32)] {
        let op = make_fjlt(m, n, 4242).unwrap();
        // materialize column by column through basis vectors
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                op.apply_dense(&DenseVector::new(e)).unwrap().into_vec()
            })
            .collect();
        for seed in 0..20u64 {
            let x = random_cp(&[n], 1, FactorDistribution::Gaussian, 600 + seed)
                .unwrap()
                .materialize()
                .unwrap();
            let fast = op.apply_dense(&x).unwrap();
            let mut slow = vec![0.0; m];
            for (j, col) in cols.iter().enumerate() {
                for (acc, c) in slow.iter_mut().zip(col) {
                    *acc += c * x.as_slice()[j];
                }
            }
            let d = rel_discrepancy(&fast, &DenseVector::new(slow));
            assert!(d <= 1e-10, "N={n}: discrepancy {d}");
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.1}s");
    println!("[PASS] criterion 2: FJLT fast path equals materialized matrix ({elapsed:.2}s)");
}

/// Criterion 3: pairwise distances equal the median sketch of differences to
/// 1e-12 on 10 random points; tie-break and homogeneity hold exactly.
#[test]
fn criterion_03_algorithm_consistency() {
    let modes = [8usize, 8, 8];
    let spec = OperatorSpec {
        kind: SketchKind::KhatriRao,
        m: 32,
        input_shape: InputShape::Modes(modes.to_vec()),
        seed: 0,
        row_distribution: Some(RowDistribution::Gaussian),
        mode_ops: None,
    };
    let committee = Committee::from_spec(&spec, 2, 77).unwrap();
    let pts: Vec<CpTensor> = (0..10)
        .map(|s| random_unit_cp(&modes, 1, FactorDistribution::Gaussian, 800 + s).unwrap())
        .collect();
    let matrix = committee.pairwise_distances(&pts).unwrap();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let diff = cp_difference(&pts[i], &pts[j]).unwrap();
            let want = committee.median_sketch(&diff).unwrap().norm();
            let got = matrix.get(i, j);
            assert!(
                (got - want).abs() <= 1e-12 * want.max(1.0),
                "pair ({i},{j}): {got} vs {want}"
            );
        }
    }

    // tie-break: all-equal values select index 0; mixed ties select smallest
    assert_eq!(argmed(&[1.0, 1.0, 1.0]).unwrap(), 0);
    assert_eq!(argmed(&[2.0, 1.0, 2.0, 1.0, 2.0]).unwrap(), 0);
    assert_eq!(argmed(&[0.9, 1.0, 1.1]).unwrap(), 1);

    // homogeneity: exact selected-index invariance and exact scaling for
    // powers of two
    let x = pts[0].materialize().unwrap();
    let gauss_spec = OperatorSpec {
        kind: SketchKind::Gaussian,
        m: 16,
        input_shape: InputShape::Flat(512),
        seed: 0,
        row_distribution: None,
        mode_ops: None,
    };
    let dense_committee = Committee::from_spec(&gauss_spec, 2, 13).unwrap();
    let (i0, y0) = dense_committee.median_sketch_indexed(&x).unwrap();
    for alpha in [-2.0f64, 0.5] {
        let (i1, y1) = dense_committee.median_sketch_indexed(&x.scaled(alpha)).unwrap();
        assert_eq!(i0, i1);
        assert_eq!(y1, y0.scaled(alpha));
    }
    println!("[PASS] criterion 3: pairwise/median-sketch agreement, tie-break, homogeneity");
}

/// Criterion 4: median-of-means Monte Carlo at (p = 0.2, k = 5) stays within
/// the closed-form bound plus the 99% CI half-width, < 10 s.
#[test]
fn criterion_04_mom_tail_bound() {
    let t0 = Instant::now();
    let est = polyapprox::mom_monte_carlo(0.2, 5, 100_000, 2024).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    assert!((est.bound - 0.064_548_3).abs() < 1e-6, "bound {}", est.bound);
    assert!(
        est.rate <= est.bound + est.ci99_half_width,
        "rate {} above bound {} + hw {}",
        est.rate,
        est.bound,
        est.ci99_half_width
    );
    assert!(elapsed < 10.0, "took {elapsed:.1}s");
    println!(
        "[PASS] criterion 4: mom tail bound (empirical {:.5} <= {:.5} + {:.5}, {elapsed:.2}s)",
        est.rate, est.bound, est.ci99_half_width
    );
}

/// Criterion 5: the ReLU approximant's grid sup-error decreases with ratio
/// >= 1.5 at degrees 8, 16, 32, 64, < 5 s.
#[test]
fn criterion_05_relu_rate() {
    let t0 = Instant::now();
    let grid_err = |d: usize| {
        let p = polyapprox::relu_approx(d).unwrap();
        (0..=10_000)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / 10_000.0;
                (p.eval(x) - x.max(0.0)).abs()
            })
            .fold(0.0f64, f64::max)
    };
    let errs: Vec<f64> = [8usize, 16, 32, 64].iter().map(|&d| grid_err(d)).collect();
    for w in errs.windows(2) {
        assert!(w[0] > w[1], "not decreasing: {errs:?}");
        assert!(w[0] / w[1] >= 1.5, "ratio {} below 1.5", w[0] / w[1]);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.1}s");
    println!("[PASS] criterion 5: ReLU approximation rate (errors {errs:?}, {elapsed:.2}s)");
}

/// Criterion 6: counting polynomials at (eps = 0.5, M = 3, eta = 0.25) pass
/// all grid conditions at 10^4 resolution with degree <= ceil(3 M / (eps eta)),
/// < 5 s.
#[test]
fn criterion_06_counting_polynomials() {
    let t0 = Instant::now();
    let upper = polyapprox::counting_poly_upper(0.5, 3.0, 0.25).unwrap();
    let lower = polyapprox::counting_poly_lower(0.5, 3.0, 0.25).unwrap();
    let degree_cap = (polyapprox::DEGREE_CONSTANT * 3.0 / (0.5 * 0.25)).ceil() as usize;
    assert_eq!(degree_cap, 72);
    assert!(upper.poly.degree() <= degree_cap);
    assert!(lower.poly.degree() <= degree_cap);
    for r in [&upper.report, &lower.report] {
        assert!(r.range_margin >= 0.0);
        assert!(r.near_margin >= 0.0);
        assert!(r.far_margin >= 0.0);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.1}s");
    println!(
        "[PASS] criterion 6: counting polynomials certified (degree {} <= {degree_cap}, {elapsed:.2}s)",
        upper.poly.degree()
    );
}

/// Criterion 7: at equal total measurements (m0 = 64, committee 7) over 1000
/// paired trials of Khatri-Rao sketches on 50 unit rank-1 tensors, the median
/// committee fails strictly less often, significant at 95% (McNemar), < 5 min.
#[test]
fn criterion_07_committee_beats_single_sketch() {
    let t0 = Instant::now();
    let cfg = ExperimentConfig {
        schema_version: 1,
        problem: ProblemConfig {
            mode_lengths: vec![8, 8, 8],
            rank: 1,
            points: 50,
            family: PointFamily::RandomUnitCp,
            target_rank: None,
        },
        operator: OperatorConfig {
            kind: SketchKind::KhatriRao,
            m: 64,
            row_distribution: Some(RowDistribution::Gaussian),
            mode_ops: None,
        },
        committee_k: 3,
        epsilon: 0.5,
        trials: 1000,
        seed: 31_337,
    };
    let r = run_committee_compare(&cfg).unwrap().results;
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(
        r.committee_failures < r.single_failures,
        "committee {} not below single {}",
        r.committee_failures,
        r.single_failures
    );
    // one-sided McNemar test at 95%: z > 1.645
    assert!(
        r.mcnemar_z > 1.645,
        "paired difference not significant: z = {}",
        r.mcnemar_z
    );
    assert!(elapsed < 300.0, "took {elapsed:.1}s");
    println!(
        "[PASS] criterion 7: committee {:.3} < single {:.3} (z = {:.1}, {elapsed:.1}s)",
        r.committee_rate, r.single_rate, r.mcnemar_z
    );
}

/// Criterion 8: the closed-form calculators reproduce their reference values
/// against independent re-evaluations to 6 significant digits, and the
/// monotonicity sweeps hold on 100-point grids.
#[test]
fn criterion_08_bound_calculators() {
    use bounds::{
        fjlt_dim, median_committee_k, norming_log_card, required_phi, subgaussian_dim,
        tensor_sufficient_dim, ConstantSet, VarietyParams,
    };
    let unit = ConstantSet::default();
    let six = |v: f64, oracle: f64| {
        assert!(
            (v - oracle).abs() <= 1e-6 * oracle.abs().max(1e-300),
            "{v} vs {oracle}"
        )
    };

    // norming-set cardinality: 2 (log 8 - log log 2)
    let v = norming_log_card(0.0, 2, 4, 2.0, &unit).unwrap();
    six(v, 2.0 * ((8.0f64).ln() - (2.0f64).ln().ln()));
    six(v, 4.891_908_924_5);

    // polymap threshold: 3 log 2 + 3 log 3 + log 100
    let vp = VarietyParams::polymap(3, 2).unwrap();
    let t = required_phi(&vp, 0.01, &unit).unwrap();
    six(t, 9.980_448_593_7);

    // sub-Gaussian dimension: ceil(2 t / 0.25) = 80
    assert_eq!(subgaussian_dim(0.5, 0.01, &vp, 1.0, &unit).unwrap(), 80);

    // tensor-structured dimension: max(2*16, 4*4) = 32
    assert_eq!(
        tensor_sufficient_dim(0.5, (-4.0f64).exp(), 2, &unit).unwrap(),
        32
    );

    // FJLT dimension: 4 t [ln^2(2t) ln 1024 + ln 100] -> 2664
    let real = 4.0 * t * ((t / 0.5).ln().powi(2) * (1024.0f64).ln() + (100.0f64).ln());
    six(real, 2_663.973_25);
    assert_eq!(fjlt_dim(0.5, 0.01, &vp, 1024.0, &unit).unwrap(), 2664);

    // committee size: ceil(6 ln 54 + ln 100) = 29
    let cb = median_committee_k(6, 27.0, 0.5, 0.01, &unit).unwrap();
    assert_eq!(cb.k, 29);

    // mom bound: 0.8^6 / sqrt(5.25 pi)
    let bound = polyapprox::mom_tail_bound(0.2, 5).unwrap();
    six(
        bound,
        0.8f64.powi(6) / (std::f64::consts::PI * 5.25).sqrt(),
    );
    six(bound, 0.064_548_378);

    // monotonicity sweeps on 100-point grids
    let mut prev = u64::MAX;
    for i in 0..100 {
        let eps = 0.05 + 0.9 * i as f64 / 99.0;
        let m = subgaussian_dim(eps, 0.01, &vp, 1.0, &unit).unwrap();
        assert!(m <= prev);
        prev = m;
    }
    let mut prev = 0u64;
    for i in 0..100 {
        let delta = 0.5 / 1.15f64.powi(i);
        let m = fjlt_dim(0.5, delta, &vp, 1024.0, &unit).unwrap();
        assert!(m >= prev);
        prev = m;
    }
    let mut prev = 0u64;
    for n in 0..100u32 {
        let b = median_committee_k(n, 200.0, 0.5, 0.01, &unit).unwrap();
        assert!(b.k >= prev);
        prev = b.k;
    }
    println!("[PASS] criterion 8: bound calculators reproduce reference values to 6 digits");
}

/// Criterion 9: Gaussian concentration at m = 2000: the empirical probability
/// of distortion above 0.2 over 10^4 seeds is at most 0.01, < 1 min.
#[test]
fn criterion_09_gaussian_concentration() {
    let t0 = Instant::now();
    let n = 16;
    let x = tensor_core::normalize(&DenseVector::new(
        (0..n).map(|i| 1.0 + ((i * i) as f64).sin()).collect(),
    ))
    .unwrap();
    let mut bad = 0u32;
    for seed in 0..10_000u64 {
        let op = make_gaussian(2000, n, seed).unwrap();
        let v = op.apply_dense(&x).unwrap().norm_sq();
        if (v - 1.0).abs() > 0.2 {
            bad += 1;
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let rate = bad as f64 / 10_000.0;
    assert!(rate <= 0.01, "failure rate {rate}");
    assert!(elapsed < 60.0, "took {elapsed:.1}s");
    println!("[PASS] criterion 9: Gaussian concentration (rate {rate}, {elapsed:.1}s)");
}

/// Criterion 10: the factored Khatri-Rao path at n = 64, d = 3, r = 4,
/// m = 256 is at least 20x faster than materialize-then-dense, and reports
/// are byte-deterministic given (config, seed).
#[test]
fn criterion_10_performance_and_determinism() {
    let modes = [64usize, 64, 64];
    let t = random_cp(&modes, 4, FactorDistribution::Gaussian, 5).unwrap();
    let op = make_khatri_rao(256, &modes, RowDistribution::Gaussian, 6).unwrap();

    let _ = op.apply_cp(&t).unwrap();
    let mut fast = f64::INFINITY;
    for _ in 0..3 {
        let t0 = Instant::now();
        let _ = op.apply_cp(&t).unwrap();
        fast = fast.min(t0.elapsed().as_secs_f64());
    }
    let mut slow = f64::INFINITY;
    for _ in 0..3 {
        let t0 = Instant::now();
        let x = t.materialize().unwrap();
        let _ = op.apply_dense(&x).unwrap();
        slow = slow.min(t0.elapsed().as_secs_f64());
    }
    assert!(
        slow >= 20.0 * fast,
        "dense {slow:.6}s not 20x the factored {fast:.6}s"
    );

    let cfg = ExperimentConfig {
        schema_version: 1,
        problem: ProblemConfig {
            mode_lengths: vec![8, 8],
            rank: 2,
            points: 8,
            family: PointFamily::CpDifferences,
            target_rank: None,
        },
        operator: OperatorConfig {
            kind: SketchKind::Kfjlt,
            m: 16,
            row_distribution: None,
            mode_ops: None,
        },
        committee_k: 1,
        epsilon: 0.5,
        trials: 25,
        seed: 99,
    };
    let a = run_distortion(&cfg).unwrap();
    let b = run_distortion(&cfg).unwrap();
    assert_eq!(
        serde_json::to_vec(&a.results).unwrap(),
        serde_json::to_vec(&b.results).unwrap()
    );
    assert_eq!(a.config_hash, b.config_hash);
    println!(
        "[PASS] criterion 10: factored path {:.1}x faster; reports deterministic",
        slow / fast
    );
}
