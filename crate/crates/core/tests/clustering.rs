//! Property tests for K-means, spectral clustering and the eigensolver.

use std::f64::consts::PI;

use proptest::prelude::*;
use qclust::cluster::{
    assign_with, elbow_curve, kmeans, kmeans_best_of, kmeans_with, spectral_cluster, symmetric_eig,
    update_step, AnalyticSimilarity, DistanceMeasure, Init, KMeansConfig, SpectralConfig,
    SwapTestSimilarity,
};
use qclust::encode::FidelityMode;
use qclust::metrics::adjusted_rand_index;
use qclust::Dataset;

fn dataset(max_rows: usize, cols: usize, hi: f64) -> impl Strategy<Value = Dataset> {
    (4..=max_rows).prop_flat_map(move |m| {
        prop::collection::vec(0.0..=hi, m * cols)
            .prop_map(move |v| Dataset::from_flat(m, cols, v).unwrap())
    })
}

fn mean(data: &Dataset) -> Vec<f64> {
    (0..data.n_cols())
        .map(|j| data.column(j).iter().sum::<f64>() / data.n_rows() as f64)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euclidean_wcss_never_increases(data in dataset(200, 2, 1.0), k in 1usize..6, seed in any::<u64>()) {
        let config = KMeansConfig { seed, ..KMeansConfig::new(k.min(data.n_rows())) };
        let result = kmeans(&data, &config).unwrap();
        for w in result.wcss_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].max(1.0), "{:?}", result.wcss_history);
        }
    }

    #[test]
    fn runs_are_deterministic(data in dataset(40, 2, PI), k in 1usize..4, seed in any::<u64>(), sampled in any::<bool>()) {
        for measure in [DistanceMeasure::Euclidean, DistanceMeasure::SwapTest, DistanceMeasure::QuantumKernel] {
            let config = KMeansConfig {
                seed,
                measure,
                fidelity_mode: if sampled { FidelityMode::Sampled { shots: 256, seed } } else { FidelityMode::Exact },
                ..KMeansConfig::new(k)
            };
            prop_assert_eq!(kmeans(&data, &config).unwrap(), kmeans(&data, &config).unwrap());
        }
    }

    #[test]
    fn permuting_rows_permutes_assignments(
        (data, order) in dataset(30, 2, PI).prop_flat_map(|d| {
            let m = d.n_rows();
            (Just(d), Just((0..m).collect::<Vec<_>>()).prop_shuffle())
        }),
        measure in prop_oneof![Just(DistanceMeasure::Euclidean), Just(DistanceMeasure::SwapTest)],
    ) {
        let init = vec![data.row(0).to_vec(), data.row(1).to_vec(), data.row(2).to_vec()];
        let config = KMeansConfig { measure, init: Init::Explicit(init), ..KMeansConfig::new(3) };
        let base = kmeans(&data, &config).unwrap();
        let permuted = kmeans(&data.permuted(&order).unwrap(), &config).unwrap();
        for (new_i, &old_i) in order.iter().enumerate() {
            prop_assert_eq!(permuted.assignments[new_i], base.assignments[old_i]);
        }
        prop_assert_eq!(permuted.iterations, base.iterations);
    }

    #[test]
    fn swap_test_matches_analytic_each_iteration(data in dataset(40, 2, PI), seed in any::<u64>(), k in 2usize..4) {
        let config = KMeansConfig { seed, measure: DistanceMeasure::SwapTest, ..KMeansConfig::new(k) };
        // replay every prefix of the run so each intermediate state is compared
        let quantum = SwapTestSimilarity { mode: FidelityMode::Exact };
        for iters in 1..=8 {
            let cut = KMeansConfig { max_iter: iters, ..config.clone() };
            let q = kmeans_with(&data, &cut, &quantum).unwrap();
            let a = kmeans_with(&data, &cut, &AnalyticSimilarity).unwrap();
            prop_assert_eq!(&q.assignments, &a.assignments);
            prop_assert_eq!(&q.centroids, &a.centroids);
            prop_assert_eq!(q.iterations, a.iterations);
            for (fq, fa) in q.fidelity_history.iter().zip(&a.fidelity_history) {
                prop_assert!((fq - fa).abs() <= 1e-9);
            }
            if q.converged {
                break;
            }
        }
    }

    #[test]
    fn single_cluster_centroid_is_the_mean(data in dataset(30, 3, PI)) {
        for measure in [DistanceMeasure::Euclidean, DistanceMeasure::SwapTest, DistanceMeasure::QuantumKernel] {
            let result = kmeans(&data, &KMeansConfig { measure, ..KMeansConfig::new(1) }).unwrap();
            for (c, m) in result.centroids[0].iter().zip(mean(&data)) {
                prop_assert!((c - m).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantum_runs_record_fidelity_and_terminate(data in dataset(40, 2, PI), seed in any::<u64>()) {
        let config = KMeansConfig { seed, measure: DistanceMeasure::QuantumKernel, max_iter: 25, ..KMeansConfig::new(3) };
        let result = kmeans(&data, &config).unwrap();
        prop_assert!(result.iterations <= 25);
        prop_assert_eq!(result.fidelity_history.len(), result.iterations);
        prop_assert!(result.fidelity_history.iter().all(|&f| (0.0..=data.n_rows() as f64 + 1e-9).contains(&f)));
    }

    #[test]
    fn elbow_curve_is_monotone(data in dataset(40, 2, 1.0), seed in any::<u64>()) {
        let base = KMeansConfig { seed, ..KMeansConfig::new(1) };
        let kmax = data.n_rows().min(6);
        let curve = elbow_curve(&data, 1, kmax, &base, 3).unwrap();
        prop_assert_eq!(curve.len(), kmax);
        for w in curve.windows(2) {
            prop_assert!(w[1].1 <= w[0].1 + 1e-12);
        }
    }

    #[test]
    fn jacobi_reconstructs(n in 2usize..12, values in prop::collection::vec(-5.0f64..5.0, 144)) {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                a[i * n + j] = values[i * 12 + j];
                a[j * n + i] = values[i * 12 + j];
            }
        }
        let eig = symmetric_eig(&a, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|l| eig.vectors[i * n + l] * eig.values[l] * eig.vectors[j * n + l]).sum();
                prop_assert!((r - a[i * n + j]).abs() < 1e-9);
            }
        }
        for w in eig.values.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }
}

#[test]
fn assignment_ties_go_to_lower_index() {
    let data = Dataset::from_rows(&[[0.5]]).unwrap();
    let centroids = vec![vec![0.0], vec![1.0]];
    let (a, _) = assign_with(&data, &centroids, &qclust::cluster::EuclideanSimilarity).unwrap();
    assert_eq!(a, vec![0]);
}

#[test]
fn update_step_reports_empty_clusters() {
    let data = Dataset::from_rows(&[[0.0], [2.0]]).unwrap();
    let means = update_step(&data, &[0, 0], 2).unwrap();
    assert_eq!(means, vec![Some(vec![1.0]), None]);
}

#[test]
fn best_of_restarts_is_reproducible() {
    let data = Dataset::from_rows(&[
        [0.0, 0.1],
        [0.2, 0.0],
        [0.9, 1.0],
        [1.0, 0.8],
        [0.5, 0.5],
        [0.1, 0.9],
    ])
    .unwrap();
    let config = KMeansConfig {
        seed: 42,
        ..KMeansConfig::new(3)
    };
    let a = kmeans_best_of(&data, &config, 8).unwrap();
    let b = kmeans_best_of(&data, &config, 8).unwrap();
    assert_eq!(a.result, b.result);
    assert_eq!(a.restart, b.restart);
}

/// Two concentric rings with `per_ring` points each.
fn rings(per_ring: usize) -> (Dataset, Vec<usize>) {
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for (label, radius) in [(0, 1.0), (1, 4.0)] {
        for i in 0..per_ring {
            let t = 2.0 * PI * i as f64 / per_ring as f64;
            rows.push([radius * t.cos(), radius * t.sin()]);
            truth.push(label);
        }
    }
    (Dataset::from_rows(&rows).unwrap(), truth)
}

#[test]
fn spectral_separates_rings() {
    let (data, truth) = rings(30);
    let spectral = spectral_cluster(
        &data,
        &SpectralConfig {
            sigma: Some(0.5),
            ..SpectralConfig::new(2)
        },
    )
    .unwrap();
    assert!(adjusted_rand_index(&spectral.assignments, &truth).unwrap() >= 0.9);
    let euclid = kmeans_best_of(&data, &KMeansConfig::new(2), 10).unwrap();
    assert!(adjusted_rand_index(&euclid.result.assignments, &truth).unwrap() <= 0.5);
}
