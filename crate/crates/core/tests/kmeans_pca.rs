use catalogue_core::kmeans::{distortion, kmeans, nearest, KMeansParams};
use catalogue_core::matrix::squared_distance;
use catalogue_core::pca::project_2d;
use catalogue_core::Matrix;
use catalogue_testkit::{
    best_bipartition, euclid, oracle_project_2d, planar_points, rng, same_partition, two_blobs,
};
use proptest::prelude::*;
use rand::Rng;

/// Asserts assignment/centroid consistency within `tol`.
fn assert_consistent(data: &Matrix, assignments: &[usize], centroids: &Matrix, tol: f64) {
    for (i, point) in data.iter_rows().enumerate() {
        let own = squared_distance(point, centroids.row(assignments[i]));
        for c in 0..centroids.rows() {
            assert!(own <= squared_distance(point, centroids.row(c)) + tol, "row {i}");
        }
        assert_eq!(nearest(point, centroids), assignments[i]);
    }
    for c in 0..centroids.rows() {
        let members: Vec<&[f64]> = data
            .iter_rows()
            .zip(assignments)
            .filter(|(_, &a)| a == c)
            .map(|(p, _)| p)
            .collect();
        if members.is_empty() {
            continue;
        }
        for j in 0..data.cols() {
            let mean = members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64;
            assert!((centroids.get(c, j) - mean).abs() <= tol, "centroid {c} coord {j}");
        }
    }
}

#[test]
fn exhaustive_bipartition_recovers_blob_labels() {
    let mut r = rng(42);
    let (data, labels) = two_blobs(&mut r, 5, 2, 10.0, 1.0);
    let rows = data.to_rows();
    assert!(same_partition(&best_bipartition(&rows), &labels));
}

#[test]
fn two_blobs_recovered_for_fifty_seeds() {
    for seed in 0..50u64 {
        let mut r = rng(1_000 + seed);
        let (data, labels) = two_blobs(&mut r, 50, 2, 10.0, 1.0);
        let out = kmeans(&data, &KMeansParams::new(2, seed)).unwrap();
        assert!(same_partition(&out.assignments, &labels), "seed {seed}");

        // The brute-force optimum on a subsample agrees with the labels too.
        let pick: Vec<usize> = (0..10).map(|i| if i < 5 { i * 7 } else { 50 + i * 3 }).collect();
        let sub: Vec<Vec<f64>> = pick.iter().map(|&i| data.row(i).to_vec()).collect();
        let sub_labels: Vec<usize> = pick.iter().map(|&i| labels[i]).collect();
        let sub_fit: Vec<usize> = pick.iter().map(|&i| out.assignments[i]).collect();
        assert!(same_partition(&best_bipartition(&sub), &sub_labels));
        assert!(same_partition(&sub_fit, &sub_labels));

        assert!(out.history.windows(2).all(|w| w[1] <= w[0]), "seed {seed}: {:?}", out.history);
        assert!(out.converged);
        assert_consistent(&data, &out.assignments, &out.centroids, 1e-9);
    }
}

#[test]
fn kmeans_distortion_matches_definition() {
    let mut r = rng(3);
    let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let data = Matrix::from_rows(&rows).unwrap();
    let out = kmeans(&data, &KMeansParams::new(5, 9)).unwrap();
    let direct: f64 = rows
        .iter()
        .zip(&out.assignments)
        .map(|(p, &c)| squared_distance(p, out.centroids.row(c)))
        .sum();
    assert_eq!(out.distortion, direct);
    assert_eq!(out.distortion, distortion(&data, &out.assignments, &out.centroids));
}

#[test]
fn planar_points_keep_pairwise_distances() {
    for case in 0..100u64 {
        let mut r = rng(case);
        let n = r.random_range(3..40);
        let rows = planar_points(&mut r, n);
        let data = Matrix::from_rows(&rows).unwrap();
        let out = project_2d(&data);
        let oracle = oracle_project_2d(&rows);
        for i in 0..n {
            for j in (i + 1)..n {
                let original = euclid(&rows[i], &rows[j]);
                let projected = euclid(out.row(i), out.row(j));
                let via_oracle = euclid(&oracle[i], &oracle[j]);
                assert!((original - projected).abs() < 1e-9, "case {case}");
                assert!((via_oracle - projected).abs() < 1e-9, "case {case}");
            }
            // same axes and orientation as the oracle
            assert!((out.get(i, 0) - oracle[i][0]).abs() < 1e-9, "case {case}");
            assert!((out.get(i, 1) - oracle[i][1]).abs() < 1e-9, "case {case}");
        }
    }
}

#[test]
fn projection_columns_orthogonal_and_ordered() {
    for case in 0..100u64 {
        let mut r = rng(500 + case);
        let n = r.random_range(2..60);
        let d = r.random_range(2..12);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|j| r.random_range(-1.0..1.0) * (j + 1) as f64).collect())
            .collect();
        let out = project_2d(&Matrix::from_rows(&rows).unwrap());
        let col = |j: usize| (0..n).map(|i| out.get(i, j)).collect::<Vec<_>>();
        let (x, y) = (col(0), col(1));
        let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
        assert!(mean(&x).abs() < 1e-9 && mean(&y).abs() < 1e-9);
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-9, "case {case}: dot {dot}");
        let var = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>() / n as f64;
        assert!(var(&x) + 1e-12 >= var(&y), "case {case}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lloyd_invariants_on_random_data(seed in any::<u64>(), n in 2usize..80, d in 1usize..6, k in 1usize..9) {
        let k = k.min(n);
        let mut r = rng(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random_range(-5.0..5.0)).collect()).collect();
        let data = Matrix::from_rows(&rows).unwrap();
        let out = kmeans(&data, &KMeansParams { k, seed, max_iters: 500, tol: 0.0 }).unwrap();
        prop_assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(out.assignments.iter().all(|&c| c < k));
        prop_assert!(out.converged);
        assert_consistent(&data, &out.assignments, &out.centroids, 1e-9);
        let again = kmeans(&data, &KMeansParams { k, seed, max_iters: 500, tol: 0.0 }).unwrap();
        prop_assert_eq!(out, again);
    }
}
