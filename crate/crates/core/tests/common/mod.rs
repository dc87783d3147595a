//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the crate's numerics or split search.

#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use obforest::Dataset;
use rand::Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

pub fn transpose(a: &Mat) -> Mat {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for p in 0..k {
            let aip = a[i][p];
            for j in 0..m {
                out[i][j] += aip * b[p][j];
            }
        }
    }
    out
}

pub fn matvec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Gauss-Jordan elimination with partial pivoting; solves `A X = B`.
pub fn solve(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let mut aug: Mat = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb).copied().collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        aug.swap(col, piv);
        let p = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    for c in 0..n + m {
                        aug[r][c] -= f * aug[col][c];
                    }
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Number of negative pivots of the symmetric matrix `M` (its count of
/// negative eigenvalues, by Sylvester's law of inertia).
fn negative_inertia(m: &Mat) -> usize {
    let n = m.len();
    let mut a = m.clone();
    let mut neg = 0;
    for k in 0..n {
        let p = a[k][k];
        if p < 0.0 {
            neg += 1;
        }
        let p = if p == 0.0 { 1e-300 } else { p };
        for i in k + 1..n {
            let f = a[i][k] / p;
            for j in k + 1..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    neg
}

fn shifted(g: &Mat, h: &Mat, lambda: f64) -> Mat {
    g.iter()
        .zip(h)
        .map(|(rg, rh)| rg.iter().zip(rh).map(|(x, y)| x - lambda * y).collect())
        .collect()
}

/// Smallest eigenpair of the definite pencil `G z = λ H z` by inertia
/// bisection on `G − λH` followed by inverse iteration.
pub fn pencil_oracle(g: &Mat, h: &Mat) -> (f64, Vec<f64>) {
    let n = g.len();
    let (mut lo, mut hi) = (-1.0, 1.0);
    while negative_inertia(&shifted(g, h, lo)) > 0 {
        lo *= 2.0;
    }
    while negative_inertia(&shifted(g, h, hi)) == 0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if negative_inertia(&shifted(g, h, mid)) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let sigma = lambda - 1e-9 * lambda.abs().max(1e-12);
    let op = shifted(g, h, sigma);
    let mut x = vec![1.0; n];
    for _ in 0..8 {
        let rhs: Mat = matvec(h, &x).into_iter().map(|v| vec![v]).collect();
        let y: Vec<f64> = solve(&op, &rhs).into_iter().map(|r| r[0]).collect();
        let nn = norm(&y);
        x = y.into_iter().map(|v| v / nn).collect();
    }
    (lambda, x)
}

/// `|cos|` of the angle between two vectors.
pub fn abs_cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (norm(a) * norm(b))).abs().min(1.0)
}

pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let mut s = 1.0;
    for &c in counts {
        let p = c as f64 / n as f64;
        s -= p * p;
    }
    s
}

/// Largest gain over every midpoint threshold of every listed feature,
/// evaluated by re-partitioning the node for each candidate.
pub fn brute_force_axis_gain(data: &Dataset, rows: &[usize], features: &[usize]) -> Option<f64> {
    let c = data.num_classes();
    let mut parent = vec![0; c];
    for &i in rows {
        parent[data.label(i)] += 1;
    }
    let mut best: Option<f64> = None;
    for &f in features {
        let mut values: Vec<f64> = rows.iter().map(|&i| data.row(i)[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let t = if t <= w[0] { w[1] } else { t };
            let mut left = vec![0; c];
            let mut right = vec![0; c];
            for &i in rows {
                if data.row(i)[f] >= t {
                    right[data.label(i)] += 1;
                } else {
                    left[data.label(i)] += 1;
                }
            }
            let g = obforest::tree::gini_gain(&parent, &left, &right).unwrap();
            if best.is_none_or(|b| g > b) {
                best = Some(g);
            }
        }
    }
    best
}

/// Random node: up to `max_n` samples, `d` features on a coarse grid (so
/// ties occur), up to `max_c` classes with at least two present.
pub fn random_node<R: Rng>(rng: &mut R, max_n: usize, d: usize, max_c: usize) -> (Dataset, Vec<usize>) {
    let c = rng.random_range(2..=max_c);
    let n = rng.random_range(2..=max_n);
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    labels[0] = 0;
    labels[1] = 1;
    let features: Vec<f64> = (0..n * d).map(|_| rng.random_range(0..8) as f64 * 0.5).collect();
    let data = Dataset::new(features, d, labels, c).unwrap();
    let rows = (0..n).collect();
    (data, rows)
}

/// Gaussian blobs, one per class, in `d` dimensions.
pub fn blobs<R: Rng>(rng: &mut R, per_class: usize, d: usize, c: usize, spread: f64) -> Dataset {
    let centers: Vec<Vec<f64>> = (0..c)
        .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (k, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            for m in center {
                // sum of uniforms, roughly normal
                let noise: f64 = (0..4).map(|_| rng.random_range(-1.0..1.0)).sum::<f64>() * 0.5;
                features.push(m + spread * noise);
            }
            labels.push(k);
        }
    }
    Dataset::new(features, d, labels, c).unwrap()
}

/// Random symmetric positive definite matrix `AᵀA + εI` of size `n`.
pub fn random_spd<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let rows = n + 2;
    let a: Mat = (0..rows)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut m = matmul(&transpose(&a), &a);
    for (i, r) in m.iter_mut().enumerate() {
        r[i] += 0.05;
    }
    m
}

pub fn to_dmatrix(m: &Mat) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(m.len(), m[0].len(), |i, j| m[i][j])
}
