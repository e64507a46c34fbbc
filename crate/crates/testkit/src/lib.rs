//! Test-only oracles and input generators.
//!
//! Nothing here is used by the production crates. The oracles are written
//! independently of the code they check: the query interpreter re-reads query
//! text, the histogram and tag oracles scan rows directly, and the PCA oracle
//! uses a library eigendecomposition.

pub mod naive;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use catalogue_core::{DatasetRecord, Feature, FeatureKind, Matrix, RecordFields, Schema, Value};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Path of a file under the repository's `fixtures/` directory.
pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Percent-encodes everything except RFC 3986 unreserved characters.
pub fn url_encode(text: &str) -> String {
    let mut out = String::new();
    for b in text.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

/// Schema used by randomized catalogues; includes a name that needs
/// backtick quoting.
pub fn random_schema() -> Arc<Schema> {
    Arc::new(
        Schema::new(vec![
            Feature::new("Name", FeatureKind::Text),
            Feature::new("Year", FeatureKind::Integer),
            Feature::new("Unit", FeatureKind::Text),
            Feature::new("Dialect", FeatureKind::Text),
            Feature::new("Tasks", FeatureKind::TextList),
            Feature::new("Ethical Risks", FeatureKind::Text),
        ])
        .unwrap(),
    )
}

const UNITS: [&str; 6] = ["tokens", "sentences", "documents", "hours", "o'clock", "Tokens"];
const DIALECTS: [&str; 6] = ["Algeria", "Bahrain", "Egypt", "mixed", "tokens", "Yemen"];
const TASKS: [&str; 5] = ["A", "B", "C", "machine translation", "sentiment analysis"];
const RISKS: [&str; 3] = ["Low", "Medium", "High"];

fn maybe<R: Rng>(rng: &mut R, v: Value) -> Value {
    if rng.random_bool(0.1) {
        Value::Missing
    } else {
        v
    }
}

fn pick<R: Rng>(rng: &mut R, options: &[&str]) -> String {
    options.choose(rng).unwrap().to_string()
}

/// A random catalogue of `n` records over [`random_schema`].
pub fn random_records<R: Rng>(rng: &mut R, n: usize) -> Vec<DatasetRecord> {
    (0..n)
        .map(|i| {
            let mut values = RecordFields::new();
            values.insert("Name".into(), Value::Text(format!("ds-{i}")));
            let year = Value::Integer(rng.random_range(1995..=2025));
            values.insert("Year".into(), maybe(rng, year));
            let unit = Value::Text(pick(rng, &UNITS));
            values.insert("Unit".into(), maybe(rng, unit));
            let dialect = Value::Text(pick(rng, &DIALECTS));
            values.insert("Dialect".into(), maybe(rng, dialect));
            let n_tasks = rng.random_range(0..=3);
            let tasks: Vec<String> = (0..n_tasks).map(|_| pick(rng, &TASKS)).collect();
            values.insert("Tasks".into(), maybe(rng, Value::TextList(tasks)));
            let risk = Value::Text(pick(rng, &RISKS));
            values.insert("Ethical Risks".into(), maybe(rng, risk));
            DatasetRecord::new(i, values)
        })
        .collect()
}

fn quote<R: Rng>(rng: &mut R, s: &str) -> String {
    if rng.random_bool(0.5) {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

fn sp<R: Rng>(rng: &mut R) -> &'static str {
    [" ", "", "  "].choose(rng).unwrap()
}

const OPS: [&str; 6] = ["==", "!=", "<", "<=", ">", ">="];

/// One well-typed comparison over [`random_schema`].
pub fn random_comparison<R: Rng>(rng: &mut R) -> String {
    let op = *OPS.choose(rng).unwrap();
    let eq_op = if rng.random_bool(0.5) { "==" } else { "!=" };
    let (s1, s2) = (sp(rng), sp(rng));
    match rng.random_range(0..9) {
        0 => format!("Year{s1}{op}{s2}{}", rng.random_range(1990..2030)),
        1 => format!("{}{s1}{op}{s2}Year", rng.random_range(1990..2030)),
        2 => format!("Year {op} {}.5", rng.random_range(1990..2030)),
        3 => {
            let v = pick(rng, &UNITS);
            format!("Unit{s1}{op}{s2}{}", quote(rng, &v))
        }
        4 => {
            let v = pick(rng, &RISKS);
            format!("`Ethical Risks` {op} {}", quote(rng, &v))
        }
        5 => {
            let v = pick(rng, &TASKS);
            format!("Tasks{s1}{eq_op}{s2}{}", quote(rng, &v))
        }
        6 => {
            let v = pick(rng, &TASKS);
            format!("{} {eq_op} Tasks", quote(rng, &v))
        }
        7 => format!("Dialect {op} Unit"),
        _ => {
            if rng.random_bool(0.5) {
                format!("{} {op} {}", rng.random_range(0..5), rng.random_range(0..5))
            } else {
                let a = pick(rng, &["a", "b"]);
                let b = pick(rng, &["a", "b"]);
                format!("{} {op} {}", quote(rng, &a), quote(rng, &b))
            }
        }
    }
}

/// A grammar-directed random query of nesting depth at most `depth`.
pub fn random_query<R: Rng>(rng: &mut R, depth: usize) -> String {
    if depth == 0 || rng.random_bool(0.35) {
        return random_comparison(rng);
    }
    let child = |rng: &mut R| {
        let inner = random_query(rng, depth - 1);
        if rng.random_bool(0.5) {
            format!("({inner})")
        } else {
            inner
        }
    };
    match rng.random_range(0..3) {
        0 | 1 => {
            let joiner = if rng.random_bool(0.5) { " and " } else { " or " };
            let n = rng.random_range(2..=3);
            (0..n).map(|_| child(rng)).collect::<Vec<_>>().join(joiner)
        }
        _ => format!("not {}", child(rng)),
    }
}

/// Sorted unique values per feature, by scanning every row.
pub fn naive_tags(records: &[DatasetRecord], feature: &str) -> Vec<String> {
    let mut ints = BTreeSet::new();
    let mut texts = BTreeSet::new();
    for r in records {
        match r.get(feature) {
            Some(Value::Integer(n)) => {
                ints.insert(*n);
            }
            Some(Value::Text(s)) => {
                texts.insert(s.clone());
            }
            Some(Value::TextList(items)) => texts.extend(items.iter().cloned()),
            _ => {}
        }
    }
    ints.iter().map(|n| n.to_string()).chain(texts).collect()
}

/// One-pass histogram keyed by the value's display text.
pub fn naive_histogram(records: &[DatasetRecord], feature: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in records {
        let items: Vec<String> = match r.get(feature) {
            Some(Value::Integer(n)) => vec![n.to_string()],
            Some(Value::Text(s)) => vec![s.clone()],
            Some(Value::TextList(items)) => items.clone(),
            _ => vec![],
        };
        for item in items {
            *out.entry(item).or_insert(0) += 1;
        }
    }
    out
}

/// Two blobs of `per_blob` points each in `dim` dimensions, centres
/// `separation` apart along the first axis, every point within `radius` of
/// its centre. Returns the data and the blob label of each row.
pub fn two_blobs<R: Rng>(
    rng: &mut R,
    per_blob: usize,
    dim: usize,
    separation: f64,
    radius: f64,
) -> (Matrix, Vec<usize>) {
    let mut rows = Vec::with_capacity(2 * per_blob);
    let mut labels = Vec::with_capacity(2 * per_blob);
    for blob in 0..2 {
        for _ in 0..per_blob {
            // Rejection-sample the ball, then shift to the centre.
            let offset = loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-radius..=radius)).collect();
                if v.iter().map(|x| x * x).sum::<f64>().sqrt() <= radius {
                    break v;
                }
            };
            let mut point = offset;
            point[0] += blob as f64 * separation;
            rows.push(point);
            labels.push(blob);
        }
    }
    (Matrix::from_rows(&rows).unwrap(), labels)
}

/// Minimum-distortion split of `points` into two non-empty groups, by
/// enumerating every bipartition. Returns a 0/1 label per point with point 0
/// in group 0.
pub fn best_bipartition(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    assert!((2..=20).contains(&n));
    let cost = |group: &[&Vec<f64>]| -> f64 {
        let d = group[0].len();
        let mut mean = vec![0.0; d];
        for p in group {
            for (m, x) in mean.iter_mut().zip(p.iter()) {
                *m += x / group.len() as f64;
            }
        }
        group
            .iter()
            .map(|p| p.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
            .sum()
    };
    let mut best = (f64::INFINITY, 0u32);
    // Bit i set => point i in group 1; point 0 fixed in group 0.
    for mask in 1u32..(1 << (n - 1)) {
        let mask = mask << 1;
        let (g0, g1): (Vec<_>, Vec<_>) = (0..n).partition(|i| mask & (1 << i) == 0);
        let g0: Vec<_> = g0.iter().map(|&i| &points[i]).collect();
        let g1: Vec<_> = g1.iter().map(|&i| &points[i]).collect();
        let total = cost(&g0) + cost(&g1);
        if total < best.0 {
            best = (total, mask);
        }
    }
    (0..n).map(|i| ((best.1 >> i) & 1) as usize).collect()
}

/// Same partition up to relabelling.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut map = BTreeMap::new();
    let mut back = BTreeMap::new();
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            *map.entry(*x).or_insert(*y) == *y && *back.entry(*y).or_insert(*x) == *x
        })
}

/// Top-two principal projection computed with nalgebra's symmetric
/// eigendecomposition; independent of the crate's Jacobi routine.
pub fn oracle_project_2d(rows: &[Vec<f64>]) -> Vec<[f64; 2]> {
    use nalgebra::{DMatrix, SymmetricEigen};
    let n = rows.len();
    let d = rows[0].len();
    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let axes: Vec<Option<Vec<f64>>> = order
        .iter()
        .take(2)
        .map(|&c| {
            let lambda = eig.eigenvalues[c];
            (lambda > top * 1e-12 && lambda > 0.0).then(|| {
                let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
                let big = (0..d).fold(0, |b, i| if v[i].abs() > v[b].abs() { i } else { b });
                if v[big] < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                v
            })
        })
        .collect();
    (0..n)
        .map(|i| {
            let mut out = [0.0; 2];
            for (j, axis) in axes.iter().enumerate() {
                if let Some(axis) = axis {
                    out[j] = (0..d).map(|k| centered[(i, k)] * axis[k]).sum();
                }
            }
            out
        })
        .collect()
}

/// Random points on a random plane through a random origin in 3-D.
pub fn planar_points<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<[f64; 3]> = Vec::new();
    while basis.len() < 2 {
        let mut v = [0.0; 3].map(|_: f64| rng.random_range(-1.0..1.0));
        // Gram-Schmidt against what we have.
        for b in &basis {
            let p: f64 = (0..3).map(|i| v[i] * b[i]).sum();
            (0..3).for_each(|i| v[i] -= p * b[i]);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 {
            basis.push(v.map(|x| x / norm));
        }
    }
    let origin = [0.0; 3].map(|_: f64| rng.random_range(-10.0..10.0));
    (0..n)
        .map(|_| {
            let (a, b) = (rng.random_range(-5.0..5.0), rng.random_range(-2.0..2.0));
            (0..3).map(|i| origin[i] + a * basis[0][i] + b * basis[1][i]).collect()
        })
        .collect()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
