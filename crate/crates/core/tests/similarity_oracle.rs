//! DTW, distance combination, PAM and stratified sampling against
//! independent reference computations.

use std::collections::BTreeMap;

use farpls_core::features::{extract_feature_series, FeatureConfig};
use farpls_core::similarity::{
    cluster_dataset, combine_matrices, dataset_distance_matrices, dtw_distance,
    stratified_sample_weighted, ClusterAssignment, CriterionWeights, DistanceMatrix, SampleWeights,
};
use farpls_core::synth::TrajectorySynth;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{best_cost_by_enumeration, blobs, dtw_oracle, random_metric, random_series};

#[test]
fn dtw_matches_second_dp_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let dim = rng.random_range(1..=8);
        let (la, lb) = (rng.random_range(1..=50), rng.random_range(1..=50));
        let a = random_series(&mut rng, la, dim);
        let b = random_series(&mut rng, lb, dim);
        let got = dtw_distance(&a, &b).unwrap();
        let want = dtw_oracle(&a, &b);
        assert!(
            (got - want).abs() <= 1e-12 * want.max(1.0),
            "{got} vs {want}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dtw_is_symmetric_and_zero_only_on_equal_series(
        seed in 0u64..10_000, la in 1usize..20, lb in 1usize..20, dim in 1usize..5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_series(&mut rng, la, dim);
        let b = random_series(&mut rng, lb, dim);
        prop_assert_eq!(dtw_distance(&a, &b).unwrap(), dtw_distance(&b, &a).unwrap());
        prop_assert_eq!(dtw_distance(&a, &a).unwrap(), 0.0);
        if a != b {
            prop_assert!(dtw_distance(&a, &b).unwrap() > 0.0);
        }
    }

    #[test]
    fn combined_distance_ignores_weight_scale(
        ws in 0.0f64..5.0, we in 0.0f64..5.0, wt in 0.1f64..5.0, scale in 0.01f64..100.0,
    ) {
        let ids: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        let s = DistanceMatrix::from_fn(ids.clone(), |i, j| (i * j + 1) as f64);
        let e = DistanceMatrix::from_fn(ids.clone(), |i, j| (i + j) as f64 * 0.5);
        let t = DistanceMatrix::from_fn(ids, |i, j| ((i as f64) - (j as f64)).abs().sqrt());
        let w = CriterionWeights { safety: ws, efficiency: we, task_quality: wt };
        let w2 = CriterionWeights { safety: ws * scale, efficiency: we * scale, task_quality: wt * scale };
        let a = combine_matrices(&s, &e, &t, w).unwrap();
        let b = combine_matrices(&s, &e, &t, w2).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
}

#[test]
fn combined_matrix_equals_hand_recombination() {
    let gen = TrajectorySynth::new(31).generate_many(5, 30..=60);
    let ids: Vec<String> = gen.iter().map(|g| g.trajectory.id.clone()).collect();
    let series: Vec<_> = gen
        .iter()
        .map(|g| extract_feature_series(&g.trajectory, &FeatureConfig::default()))
        .collect();
    let w = CriterionWeights {
        safety: 2.0,
        efficiency: 0.5,
        task_quality: 1.5,
    };
    let (m, _) = dataset_distance_matrices(&ids, &series, w).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let want = (2.0 * m.safety.get(i, j)
                + 0.5 * m.efficiency.get(i, j)
                + 1.5 * m.task_quality.get(i, j))
                / 4.0;
            assert!((m.combined.get(i, j) - want).abs() <= 1e-12 * want.max(1.0));
        }
    }
}

#[test]
fn pam_is_never_better_than_exhaustive_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..60 {
        let n = rng.random_range(2..=8);
        let k = rng.random_range(1..=3.min(n));
        let d = random_metric(&mut rng, n);
        let a = cluster_dataset(&d, k, rng.random()).unwrap();
        let opt = best_cost_by_enumeration(&d, k);
        assert!(a.cost(&d) >= opt - 1e-9);
    }
}

#[test]
fn pam_reaches_optimum_on_separated_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..40 {
        let k = rng.random_range(1..=3);
        let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=8 / k)).collect();
        let d = blobs(&mut rng, &sizes);
        let a = cluster_dataset(&d, k, rng.random()).unwrap();
        let opt = best_cost_by_enumeration(&d, k);
        assert!((a.cost(&d) - opt).abs() <= 1e-9, "{} vs {opt}", a.cost(&d));
    }
}

#[test]
fn uniform_weight_selection_is_uniform_within_each_cluster() {
    let sizes = [12usize, 7, 5];
    let ids: Vec<String> = (0..24).map(|i| format!("t{i:02}")).collect();
    let mut labels = BTreeMap::new();
    let mut at = 0;
    for (c, &s) in sizes.iter().enumerate() {
        for id in &ids[at..at + s] {
            labels.insert(id.clone(), c);
        }
        at += s;
    }
    let clusters = ClusterAssignment {
        k: 3,
        seed: 0,
        labels,
        medoids: vec![ids[0].clone(), ids[12].clone(), ids[19].clone()],
    };
    let weights = SampleWeights::uniform(ids.iter().map(String::as_str));
    let m = 10;
    let runs = 10_000u64;
    let mut hits: BTreeMap<String, u64> = BTreeMap::new();
    for seed in 0..runs {
        for id in stratified_sample_weighted(&ids, &weights, &clusters, m, seed).unwrap() {
            *hits.entry(id).or_default() += 1;
        }
    }
    // quotas for (12, 7, 5) of 24 with m = 10 are (5, 3, 2)
    let quotas = [5.0, 3.0, 2.0];
    for id in &ids {
        let c = clusters.label_of(id).unwrap();
        let p = quotas[c] / sizes[c] as f64;
        let mean = p * runs as f64;
        let sd = (runs as f64 * p * (1.0 - p)).sqrt();
        let got = *hits.get(id).unwrap_or(&0) as f64;
        assert!(
            (got - mean).abs() <= 3.0 * sd + 1e-9,
            "{id}: {got} vs {mean} ± {}",
            3.0 * sd
        );
    }
}
