//! Lloyd's K-Means with k-means++ seeding.
//!
//! Everything is deterministic for a given seed: the generator is ChaCha8 and
//! all sums accumulate in row order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cluster::ClusterError;
use crate::matrix::{squared_distance, Matrix};

pub const DEFAULT_K: usize = 8;
pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once no centroid coordinate moves by this much or more.
    pub tol: f64,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
        }
    }
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self::new(DEFAULT_K, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Matrix,
    pub distortion: f64,
    /// Lloyd iterations performed after seeding.
    pub iterations: usize,
    /// Assignments stopped changing before the iteration cap or tolerance hit.
    pub converged: bool,
    /// Distortion after seeding and after every iteration.
    pub history: Vec<f64>,
}

pub fn kmeans(data: &Matrix, params: &KMeansParams) -> Result<KMeansResult, ClusterError> {
    let n = data.rows();
    let k = params.k;
    if k < 1 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centroids = plus_plus_seeds(data, k, &mut rng);

    let mut assignments = nearest_all(data, &centroids);
    let mut history = vec![distortion(data, &assignments, &centroids)];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iters {
        iterations += 1;
        let updated = update_centroids(data, &assignments, &centroids);
        let movement = max_abs_diff(&updated, &centroids);
        centroids = updated;
        let next = nearest_all(data, &centroids);
        converged = next == assignments;
        assignments = next;
        history.push(distortion(data, &assignments, &centroids));
        if converged || movement < params.tol {
            break;
        }
    }

    Ok(KMeansResult {
        distortion: *history.last().expect("history starts non-empty"),
        assignments,
        centroids,
        iterations,
        converged,
        history,
    })
}

/// k-means++: first centre uniform, then each next centre sampled with
/// probability proportional to squared distance from the nearest chosen one.
fn plus_plus_seeds(data: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = data.rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| squared_distance(data.row(i), data.row(chosen[0])))
        .collect();

    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            // Every remaining point coincides with a centre.
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (i, w) in nearest.iter_mut().enumerate() {
            *w = w.min(squared_distance(data.row(i), data.row(next)));
        }
    }

    let mut centroids = Matrix::zeros(k, data.cols());
    for (c, &i) in chosen.iter().enumerate() {
        centroids.row_mut(c).copy_from_slice(data.row(i));
    }
    centroids
}

/// Index of the closest centroid; ties go to the lowest id.
pub fn nearest(point: &[f64], centroids: &Matrix) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for c in 0..centroids.rows() {
        let d = squared_distance(point, centroids.row(c));
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn nearest_all(data: &Matrix, centroids: &Matrix) -> Vec<usize> {
    data.iter_rows().map(|p| nearest(p, centroids)).collect()
}

pub fn distortion(data: &Matrix, assignments: &[usize], centroids: &Matrix) -> f64 {
    data.iter_rows()
        .zip(assignments)
        .map(|(p, &c)| squared_distance(p, centroids.row(c)))
        .sum()
}

/// Member means in row order. An empty cluster takes the point farthest from
/// its current centroid (each point used at most once per update).
fn update_centroids(data: &Matrix, assignments: &[usize], previous: &Matrix) -> Matrix {
    let k = previous.rows();
    let mut sums = Matrix::zeros(k, data.cols());
    let mut counts = vec![0usize; k];
    for (point, &c) in data.iter_rows().zip(assignments) {
        counts[c] += 1;
        for (s, x) in sums.row_mut(c).iter_mut().zip(point) {
            *s += x;
        }
    }

    let mut reseeded: Vec<usize> = Vec::new();
    for c in 0..k {
        if counts[c] > 0 {
            let n = counts[c] as f64;
            sums.row_mut(c).iter_mut().for_each(|s| *s /= n);
            continue;
        }
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, (point, &a)) in data.iter_rows().zip(assignments).enumerate() {
            if reseeded.contains(&i) {
                continue;
            }
            let d = squared_distance(point, previous.row(a));
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        match far {
            Some(i) => {
                reseeded.push(i);
                sums.row_mut(c).copy_from_slice(data.row(i));
            }
            None => sums.row_mut(c).copy_from_slice(previous.row(c)),
        }
    }
    sums
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let data = matrix(&[&[0.0, 0.0], &[2.0, 4.0], &[4.0, 2.0]]);
        let out = kmeans(&data, &KMeansParams::new(1, 5)).unwrap();
        assert_eq!(out.assignments, vec![0, 0, 0]);
        assert!((out.centroids.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((out.centroids.get(0, 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn k_equal_n_gives_singletons_with_zero_distortion() {
        let data = matrix(&[&[0.0], &[1.0], &[5.0], &[9.0]]);
        let out = kmeans(&data, &KMeansParams::new(4, 11)).unwrap();
        let mut ids = out.assignments.clone();
        ids.sort_unstable();
        assert_eq!(ids, vec![0, 1, 2, 3]);
        assert_eq!(out.distortion, 0.0);
    }

    #[test]
    fn invalid_k_is_rejected() {
        let data = matrix(&[&[0.0], &[1.0]]);
        assert_eq!(
            kmeans(&data, &KMeansParams::new(0, 0)),
            Err(ClusterError::InvalidK { k: 0, n: 2 })
        );
        assert_eq!(
            kmeans(&data, &KMeansParams::new(3, 0)),
            Err(ClusterError::InvalidK { k: 3, n: 2 })
        );
    }

    #[test]
    fn duplicate_points_still_seed_k_centres() {
        let data = matrix(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], &[3.0, 3.0]]);
        let out = kmeans(&data, &KMeansParams::new(3, 2)).unwrap();
        assert_eq!(out.assignments.len(), 4);
        assert!(out.assignments.iter().all(|&c| c < 3));
        assert_eq!(out.distortion, 0.0);
    }

    #[test]
    fn empty_cluster_takes_farthest_point() {
        let data = matrix(&[&[0.0], &[1.0], &[10.0]]);
        let previous = matrix(&[&[0.5], &[100.0]]);
        let updated = update_centroids(&data, &[0, 0, 0], &previous);
        assert_eq!(updated.row(1), &[10.0]);
        assert!((updated.get(0, 0) - 11.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_result() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i * 7 % 13) as f64, (i * 5 % 11) as f64])
            .collect();
        let data = Matrix::from_rows(&rows).unwrap();
        let a = kmeans(&data, &KMeansParams::new(4, 99)).unwrap();
        let b = kmeans(&data, &KMeansParams::new(4, 99)).unwrap();
        assert_eq!(a, b);
    }
}
