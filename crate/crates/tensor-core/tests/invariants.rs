use proptest::prelude::*;
use tensor_core::{
    cp_difference, cp_norm_sq, flat_index, multi_index, random_cp, CpTensor, FactorDistribution,
};

fn small_shape() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..5, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Gram-identity norm agrees with the materialized norm.
    #[test]
    fn norm_matches_materialization(shape in small_shape(), rank in 0usize..4, seed in 0u64..1000) {
        let t = random_cp(&shape, rank, FactorDistribution::Gaussian, seed).unwrap();
        let exact = t.materialize().unwrap().norm_sq();
        let gram = cp_norm_sq(&t);
        prop_assert!((gram - exact).abs() <= 1e-10 * exact.max(1.0));
    }

    /// x - x materializes to (numerical) zero.
    #[test]
    fn self_difference_vanishes(shape in small_shape(), rank in 1usize..4, seed in 0u64..1000) {
        let t = random_cp(&shape, rank, FactorDistribution::Gaussian, seed).unwrap();
        let d = cp_difference(&t, &t).unwrap();
        prop_assert_eq!(d.rank(), 2 * rank);
        prop_assert!(cp_norm_sq(&d) <= 1e-10 * cp_norm_sq(&t).max(1.0));
    }

    /// Flattening is a bijection between flat and multi indices.
    #[test]
    fn flattening_bijection(shape in small_shape()) {
        let n: u128 = shape.iter().map(|&x| x as u128).product();
        for f in 0..n {
            let m = multi_index(f, &shape);
            prop_assert_eq!(m.len(), shape.len());
            for (i, &len) in m.iter().zip(&shape) {
                prop_assert!(*i < len);
            }
            prop_assert_eq!(flat_index(&m, &shape), f);
        }
    }

    /// materialize is linear in each factor column: perturbing one column by
    /// delta changes the output by the materialization of the perturbation.
    #[test]
    fn materialize_linear_in_columns(seed in 0u64..1000, mode in 0usize..3) {
        let shape = vec![3usize, 2, 3];
        let t = random_cp(&shape, 2, FactorDistribution::Gaussian, seed).unwrap();
        let base = t.materialize().unwrap();

        // perturb column 0 of `mode`
        let delta = 0.75;
        let mut factors: Vec<Vec<f64>> = (0..3).map(|j| t.factor(j).to_vec()).collect();
        let target = 1; // row index to perturb
        factors[mode][target] += delta;
        let perturbed = CpTensor::new(shape.clone(), 2, factors).unwrap();
        let pert = perturbed.materialize().unwrap();

        // expected change: delta * (e_target ⊗ remaining columns of term 0)
        let mut unit_factors: Vec<Vec<f64>> = (0..3)
            .map(|j| t.factor_column(j, 0).to_vec())
            .collect();
        unit_factors[mode] = {
            let mut e = vec![0.0; shape[mode]];
            e[target] = delta;
            e
        };
        let change = CpTensor::new(shape.clone(), 1, unit_factors).unwrap();
        let change = change.materialize().unwrap();

        for ((b, p), c) in base.as_slice().iter().zip(pert.as_slice()).zip(change.as_slice()) {
            prop_assert!((p - b - c).abs() <= 1e-10);
        }
    }

    /// JSON serialization round-trips exactly.
    #[test]
    fn cp_json_roundtrip(shape in small_shape(), rank in 0usize..3, seed in 0u64..1000) {
        let t = random_cp(&shape, rank, FactorDistribution::Rademacher, seed).unwrap();
        let s = tensor_core::io::cp_to_json(&t).unwrap();
        prop_assert_eq!(tensor_core::io::cp_from_json(&s).unwrap(), t);
    }
}
