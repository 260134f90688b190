//! Dense symmetric eigendecomposition.
//!
//! Cyclic Jacobi rotations; accurate to machine precision for the small
//! (tens to low hundreds of columns) covariance and Gram matrices the
//! reducers produce.

use ndarray::{Array1, Array2, ArrayView2};

/// Eigenpairs of a symmetric matrix, eigenvalues sorted nonincreasing.
///
/// `vectors` holds one eigenvector per column, matching `values`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix.
///
/// Only the upper triangle is read; the input is symmetrized first.
pub fn symmetric_eigen(matrix: ArrayView2<f64>) -> SymmetricEigen {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "symmetric_eigen needs a square matrix");
    let mut a = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            a[[i, j]] = matrix[[i, j]];
            a[[j, i]] = matrix[[i, j]];
        }
    }
    let mut v = Array2::<f64>::eye(n);

    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .map(|(i, j)| a[[i, j]] * a[[i, j]])
                .sum::<f64>()
                .sqrt();
            if off <= f64::EPSILON * 1e-2 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[[p, q]];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[[p, p]];
                    let aqq = a[[q, q]];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    rotate(&mut a, &mut v, p, q, c, s, t);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].total_cmp(&a[[i, i]]).then(i.cmp(&j)));
    let values = Array1::from_iter(order.iter().map(|&i| a[[i, i]]));
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    SymmetricEigen { values, vectors }
}

fn rotate(a: &mut Array2<f64>, v: &mut Array2<f64>, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let n = a.nrows();
    let apq = a[[p, q]];
    a[[p, p]] -= t * apq;
    a[[q, q]] += t * apq;
    a[[p, q]] = 0.0;
    a[[q, p]] = 0.0;
    for r in 0..n {
        if r != p && r != q {
            let arp = a[[r, p]];
            let arq = a[[r, q]];
            let new_rp = c * arp - s * arq;
            let new_rq = s * arp + c * arq;
            a[[r, p]] = new_rp;
            a[[p, r]] = new_rp;
            a[[r, q]] = new_rq;
            a[[q, r]] = new_rq;
        }
    }
    for r in 0..n {
        let vrp = v[[r, p]];
        let vrq = v[[r, q]];
        v[[r, p]] = c * vrp - s * vrq;
        v[[r, q]] = s * vrp + c * vrq;
    }
}

/// Flips the sign of each column so its largest-magnitude entry is positive.
///
/// Ties on magnitude resolve to the first index.
pub fn fix_column_signs(vectors: &mut Array2<f64>) {
    for mut col in vectors.columns_mut() {
        let mut best = 0usize;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col.len() > 0 && col[best] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }
}
