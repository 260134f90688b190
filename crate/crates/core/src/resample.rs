//! SMOTE oversampling of the minority class.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error, PartialEq)]
pub enum ResampleError {
    #[error("SingleClass: SMOTE needs both classes present")]
    SingleClass,
    #[error("TooFewMinority: {minority} minority rows cannot supply {k} neighbours each")]
    TooFewMinority { minority: usize, k: usize },
    #[error("target ratio {target} is below the current minority/majority ratio {current}")]
    TargetBelowCurrent { target: f64, current: f64 },
    #[error("invalid SMOTE config: {0}")]
    BadConfig(String),
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoteConfig {
    #[serde(default = "default_k")]
    pub k_neighbors: usize,
    /// Desired minority/majority count ratio after oversampling.
    #[serde(default = "default_ratio")]
    pub target_ratio: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_k() -> usize {
    5
}

fn default_ratio() -> f64 {
    1.0
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig { k_neighbors: default_k(), target_ratio: default_ratio(), seed: 0 }
    }
}

/// Result of [`smote`]: originals first, synthetic rows appended.
#[derive(Debug, Clone, PartialEq)]
pub struct Oversampled {
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
    pub minority_label: u8,
    pub n_original: usize,
}

impl Oversampled {
    pub fn synthetic(&self) -> ArrayView2<'_, f64> {
        self.features.slice(ndarray::s![self.n_original.., ..])
    }
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices (into `rows`) of the `k` nearest other rows of each row, ties by index.
pub fn nearest_neighbors(rows: ArrayView2<f64>, k: usize) -> Vec<Vec<usize>> {
    let n = rows.nrows();
    (0..n)
        .map(|i| {
            let mut cand: Vec<(f64, usize)> =
                (0..n).filter(|&j| j != i).map(|j| (sq_dist(rows.row(i), rows.row(j)), j)).collect();
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cand.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Appends synthetic minority rows `x + (y - x) u` until the minority count
/// reaches `floor(target_ratio * majority)`.
///
/// Base rows `x` cycle through the minority class in order; `y` is drawn
/// uniformly from the `k` nearest minority neighbours of `x` and
/// `u ~ Uniform(0, 1)`.
pub fn smote(features: ArrayView2<f64>, labels: &[u8], config: &SmoteConfig) -> Result<Oversampled, ResampleError> {
    if features.nrows() != labels.len() {
        return Err(ResampleError::LengthMismatch { rows: features.nrows(), labels: labels.len() });
    }
    if config.k_neighbors == 0 {
        return Err(ResampleError::BadConfig("k_neighbors must be at least 1".into()));
    }
    if !(config.target_ratio > 0.0 && config.target_ratio <= 1.0) {
        return Err(ResampleError::BadConfig(format!("target_ratio {} not in (0, 1]", config.target_ratio)));
    }
    let ones = labels.iter().filter(|&&l| l == 1).count();
    let zeros = labels.len() - ones;
    if ones == 0 || zeros == 0 {
        return Err(ResampleError::SingleClass);
    }
    let minority_label = if ones <= zeros { 1 } else { 0 };
    let (n_min, n_maj) = if minority_label == 1 { (ones, zeros) } else { (zeros, ones) };

    let current = n_min as f64 / n_maj as f64;
    let target_count = (config.target_ratio * n_maj as f64 + 1e-9).floor() as usize;
    if target_count < n_min {
        if config.target_ratio < current - 1e-12 {
            return Err(ResampleError::TargetBelowCurrent { target: config.target_ratio, current });
        }
    }
    let n_new = target_count.saturating_sub(n_min);

    let minority_idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == minority_label).collect();
    let mut out = Array2::<f64>::zeros((labels.len() + n_new, features.ncols()));
    out.slice_mut(ndarray::s![..labels.len(), ..]).assign(&features);
    let mut out_labels = labels.to_vec();

    if n_new > 0 {
        if n_min <= config.k_neighbors {
            return Err(ResampleError::TooFewMinority { minority: n_min, k: config.k_neighbors });
        }
        let minority = features.select(Axis(0), &minority_idx);
        let neighbors = nearest_neighbors(minority.view(), config.k_neighbors);
        let mut rng = rng::seeded(config.seed);
        for s in 0..n_new {
            let base = s % n_min;
            let nb = neighbors[base][rng.gen_range(0..config.k_neighbors)];
            let u: f64 = rng.gen();
            let x = minority.row(base);
            let y = minority.row(nb);
            let mut dst = out.row_mut(labels.len() + s);
            for c in 0..x.len() {
                dst[c] = x[c] + (y[c] - x[c]) * u;
            }
            out_labels.push(minority_label);
        }
    }

    Ok(Oversampled { features: out, labels: out_labels, minority_label, n_original: labels.len() })
}

/// True iff every synthetic row lies on a segment between some minority row
/// and one of its `k` nearest minority neighbours, within `1e-9`
/// (relative to the segment's coordinate magnitude).
pub fn validate_smote_geometry(minority: ArrayView2<f64>, synthetic: ArrayView2<f64>, k: usize) -> bool {
    if synthetic.nrows() == 0 {
        return true;
    }
    if minority.nrows() == 0 || synthetic.ncols() != minority.ncols() {
        return false;
    }
    let neighbors = nearest_neighbors(minority, k.min(minority.nrows().saturating_sub(1)));
    synthetic.rows().into_iter().all(|s| {
        (0..minority.nrows()).any(|i| neighbors[i].iter().any(|&j| on_segment(s, minority.row(i), minority.row(j))))
    })
}

const GEOMETRY_TOL: f64 = 1e-9;

fn on_segment(s: ArrayView1<f64>, x: ArrayView1<f64>, y: ArrayView1<f64>) -> bool {
    let scale = 1.0 + x.iter().chain(y.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = GEOMETRY_TOL * scale;
    let seg_sq = sq_dist(x, y);
    let u = if seg_sq == 0.0 {
        0.0
    } else {
        let dot: f64 = s.iter().zip(x.iter()).zip(y.iter()).map(|((s, x), y)| (s - x) * (y - x)).sum();
        dot / seg_sq
    };
    if u < -tol || u > 1.0 + tol {
        return false;
    }
    let u = u.clamp(0.0, 1.0);
    s.iter()
        .zip(x.iter())
        .zip(y.iter())
        .all(|((s, x), y)| (s - (x + (y - x) * u)).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let x = array![0.0, 0.0];
        let y = array![2.0, 2.0];
        assert!(on_segment(array![1.0, 1.0].view(), x.view(), y.view()));
        assert!(on_segment(x.view(), x.view(), y.view()));
        assert!(!on_segment(array![1.0, 1.1].view(), x.view(), y.view()));
        assert!(!on_segment(array![3.0, 3.0].view(), x.view(), y.view()));
    }

    fn toy(n_maj: usize, n_min: usize) -> (Array2<f64>, Vec<u8>) {
        let n = n_maj + n_min;
        let mut x = Array2::<f64>::zeros((n, 2));
        let mut labels = vec![0u8; n];
        for i in 0..n {
            let t = i as f64;
            x[[i, 0]] = (t * 0.37).sin() * 3.0;
            x[[i, 1]] = (t * 0.91).cos() * 2.0 + if i >= n_maj { 4.0 } else { 0.0 };
            if i >= n_maj {
                labels[i] = 1;
            }
        }
        (x, labels)
    }

    #[test]
    fn balances_eighty_twenty() {
        let (x, labels) = toy(80, 20);
        let out = smote(x.view(), &labels, &SmoteConfig::default()).unwrap();
        assert_eq!(out.labels.len(), 160);
        assert_eq!(out.labels.iter().filter(|&&l| l == 1).count(), 80);
        assert_eq!(out.features.slice(ndarray::s![..100, ..]), x);
        assert!(out.labels[100..].iter().all(|&l| l == 1));
        let minority = x.slice(ndarray::s![80.., ..]);
        assert!(validate_smote_geometry(minority, out.synthetic(), 5));
    }

    #[test]
    fn current_ratio_is_a_no_op() {
        let (x, labels) = toy(80, 20);
        let cfg = SmoteConfig { target_ratio: 0.25, ..Default::default() };
        let out = smote(x.view(), &labels, &cfg).unwrap();
        assert_eq!(out.features, x);
        assert_eq!(out.labels, labels);
    }

    #[test]
    fn error_paths() {
        let (x, labels) = toy(10, 3);
        assert_eq!(
            smote(x.view(), &labels, &SmoteConfig::default()).unwrap_err(),
            ResampleError::TooFewMinority { minority: 3, k: 5 }
        );
        let zeros = vec![0u8; 13];
        assert_eq!(smote(x.view(), &zeros, &SmoteConfig::default()).unwrap_err(), ResampleError::SingleClass);
        let (x, labels) = toy(20, 10);
        let cfg = SmoteConfig { target_ratio: 0.2, ..Default::default() };
        assert!(matches!(smote(x.view(), &labels, &cfg), Err(ResampleError::TargetBelowCurrent { .. })));
    }

    #[test]
    fn perturbed_point_fails_geometry() {
        let (x, labels) = toy(40, 12);
        let out = smote(x.view(), &labels, &SmoteConfig::default()).unwrap();
        let mut synthetic = out.synthetic().to_owned();
        synthetic[[0, 1]] += 0.1;
        let minority = x.slice(ndarray::s![40.., ..]);
        assert!(!validate_smote_geometry(minority, synthetic.view(), 5));
        assert!(validate_smote_geometry(minority, Array2::<f64>::zeros((0, 2)).view(), 5));
    }

    #[test]
    fn majority_labelled_one_is_handled() {
        let (x, labels) = toy(30, 10);
        let flipped: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
        let out = smote(x.view(), &flipped, &SmoteConfig::default()).unwrap();
        assert_eq!(out.minority_label, 0);
        assert_eq!(out.labels.iter().filter(|&&l| l == 0).count(), 30);
    }
}
