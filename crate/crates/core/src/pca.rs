//! Two-component PCA for the cluster graph layout.

use crate::matrix::{dot, Matrix};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (descending) and unit eigenvectors (one per row) of a
/// symmetric matrix, by cyclic Jacobi rotation.
pub fn symmetric_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "matrix must be square");
    let mut m = a.clone();
    // Columns of `v` accumulate the rotations.
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }

    let total: f64 = m.as_slice().iter().map(|x| x * x).sum();
    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m.get(p, q) * m.get(p, q))
            .sum();
        if off <= total * 1e-30 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                // Past the first sweeps, drop elements below diagonal precision.
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m.set(p, q, 0.0);
                    m.set(q, p, 0.0);
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps lower indices first among equal eigenvalues.
    order.sort_by(|&i, &j| m.get(j, j).total_cmp(&m.get(i, i)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (row, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(row, k, v.get(k, i));
        }
    }
    (values, vectors)
}

/// Column means of `data`, accumulated in row order.
pub fn column_means(data: &Matrix) -> Vec<f64> {
    let mut mean = vec![0.0; data.cols()];
    for row in data.iter_rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    let n = data.rows().max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Population covariance of `data` around its column means.
pub fn covariance(data: &Matrix) -> Matrix {
    let d = data.cols();
    let mean = column_means(data);
    let mut cov = Matrix::zeros(d, d);
    for row in data.iter_rows() {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..d {
            if centered[i] == 0.0 {
                continue;
            }
            for j in i..d {
                let add = centered[i] * centered[j];
                cov.set(i, j, cov.get(i, j) + add);
            }
        }
    }
    let n = data.rows().max(1) as f64;
    for i in 0..d {
        for j in i..d {
            let value = cov.get(i, j) / n;
            cov.set(i, j, value);
            cov.set(j, i, value);
        }
    }
    cov
}

/// Flips `v` so its largest-magnitude entry (first on ties) is positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The top two principal axes, each oriented and `None` when the data has
/// no variance along it.
pub fn principal_axes(data: &Matrix) -> [Option<Vec<f64>>; 2] {
    let d = data.cols();
    if d == 0 || data.rows() == 0 {
        return [None, None];
    }
    let (values, vectors) = symmetric_eigen(&covariance(data));
    let largest = values[0].max(0.0);
    let axis = |j: usize| {
        (j < d && values[j] > largest * 1e-12 && values[j] > 0.0).then(|| {
            let mut v = vectors.row(j).to_vec();
            orient(&mut v);
            v
        })
    };
    [axis(0), axis(1)]
}

/// Centres the rows and projects them onto the top two principal
/// components. Missing components (rank < 2) give zero coordinates.
pub fn project_2d(data: &Matrix) -> Matrix {
    let n = data.rows();
    let mut out = Matrix::zeros(n, 2);
    let axes = principal_axes(data);
    let mean = column_means(data);
    for (i, row) in data.iter_rows().enumerate() {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for (j, axis) in axes.iter().enumerate() {
            if let Some(axis) = axis {
                out.set(i, j, dot(&centered, axis));
            }
        }
    }
    out
}
