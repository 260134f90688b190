//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(x: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[[i, j]])
}

pub fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigenpairs sorted by decreasing eigenvalue.
pub fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Standardized covariance spectrum and all component scores.
pub fn pca_oracle(x: ArrayView2<f64>) -> (Vec<f64>, Array2<f64>) {
    let (n, m) = x.dim();
    let mut y = to_na(x);
    for j in 0..m {
        let col = y.column(j);
        let mean = col.mean();
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        for i in 0..n {
            y[(i, j)] = (y[(i, j)] - mean) / if sd > 0.0 { sd } else { 1.0 };
        }
    }
    let cov = y.transpose() * &y / (n - 1) as f64;
    let (values, vectors) = sorted_eigen(cov);
    (values, from_na(&(y * vectors)))
}

/// Principal inertias (eigenvalues of `S Sᵀ` for the standardized residual
/// `S`) and row scores `D_r^{-1/2} U Σ`, via a dense symmetric eigensolver.
pub fn mca_oracle(ind: ArrayView2<f64>) -> (Vec<f64>, Array2<f64>) {
    let (n, j) = ind.dim();
    let grand: f64 = ind.sum();
    let p = to_na(ind) / grand;
    let r: Vec<f64> = (0..n).map(|i| p.row(i).sum()).collect();
    let c: Vec<f64> = (0..j).map(|k| p.column(k).sum()).collect();
    let s = DMatrix::from_fn(n, j, |i, k| (p[(i, k)] - r[i] * c[k]) / (r[i] * c[k]).sqrt());
    let (values, u) = sorted_eigen(&s * s.transpose());
    let inertias: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    let scores = Array2::from_shape_fn((n, inertias.len()), |(i, d)| u[(i, d)] * inertias[d].sqrt() / r[i].sqrt());
    (inertias, scores)
}

/// Largest absolute difference between columns of `a` and `b` after flipping
/// each column of `b` to agree in sign with `a`.
pub fn max_diff_up_to_sign(a: ArrayView2<f64>, b: ArrayView2<f64>, cols: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for &d in cols {
        let dot: f64 = a.column(d).iter().zip(b.column(d)).map(|(x, y)| x * y).sum();
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        for (x, y) in a.column(d).iter().zip(b.column(d)) {
            worst = worst.max((x - sign * y).abs());
        }
    }
    worst
}

/// Columns whose eigenvalue is separated from its neighbours by `gap`.
pub fn separated(values: &[f64], keep: usize, gap: f64) -> Vec<usize> {
    (0..keep)
        .filter(|&d| {
            let prev = d == 0 || (values[d - 1] - values[d]).abs() > gap;
            let next = d + 1 >= values.len() || (values[d] - values[d + 1]).abs() > gap;
            prev && next
        })
        .collect()
}

/// Random indicator matrix with every column used at least once.
pub fn random_indicator(r: &mut ChaCha8Rng, n: usize, levels: &[usize]) -> Array2<f64> {
    let j: usize = levels.iter().sum();
    let mut x = Array2::zeros((n, j));
    let mut offset = 0;
    for &l in levels {
        for i in 0..n {
            let pick = if i < l { i } else { r.gen_range(0..l) };
            x[[i, offset + pick]] = 1.0;
        }
        offset += l;
    }
    x
}

pub fn random_matrix(r: &mut ChaCha8Rng, n: usize, m: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, m), |_| r.gen_range(-3.0..3.0))
}

/// Central differences of `f` at `x` with step `h`.
pub fn finite_diff(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Relative error with an absolute floor for near-zero entries.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs();
            if d < 1e-9 {
                0.0
            } else {
                d / x.abs().max(y.abs())
            }
        })
        .fold(0.0, f64::max)
}

/// AUROC as the Mann–Whitney U statistic over all positive/negative pairs.
pub fn mann_whitney(labels: &[u8], scores: &[f64]) -> f64 {
    let pos: Vec<f64> = labels.iter().zip(scores).filter(|(l, _)| **l == 1).map(|(_, s)| *s).collect();
    let neg: Vec<f64> = labels.iter().zip(scores).filter(|(l, _)| **l == 0).map(|(_, s)| *s).collect();
    let mut u = 0.0;
    for p in &pos {
        for n in &neg {
            u += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    u / (pos.len() * neg.len()) as f64
}

/// SELU `(alpha, lambda)` solving `E[selu(z)] = 0` and `E[selu(z)^2] = 1`
/// for `z ~ N(0, 1)`, by Simpson quadrature of the Gaussian integrals.
pub fn selu_fixed_point() -> (f64, f64) {
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
        let n = 200_000;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let pos_mean = simpson(&|z| z * phi(z), 0.0, 40.0);
    let pos_sq = simpson(&|z| z * z * phi(z), 0.0, 40.0);
    let neg_mean = simpson(&|z| z.exp_m1() * phi(z), -40.0, 0.0);
    let neg_sq = simpson(&|z| z.exp_m1().powi(2) * phi(z), -40.0, 0.0);
    let alpha = -pos_mean / neg_mean;
    let lambda = 1.0 / (pos_sq + alpha * alpha * neg_sq).sqrt();
    (alpha, lambda)
}

pub fn column_means(x: ArrayView2<f64>) -> Array1<f64> {
    x.mean_axis(ndarray::Axis(0)).expect("rows")
}
