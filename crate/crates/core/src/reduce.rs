//! One-hot encoding, PCA on numeric features and MCA on indicator matrices.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetSchema, DealRecord};
use crate::linalg::{fix_column_signs, symmetric_eigen};

pub const DEFAULT_PCA_DIMS: usize = 20;
pub const DEFAULT_MCA_DIMS: usize = 45;

/// Eigenvalues above `-NEG_EIGEN_TOL` are clamped to zero.
const NEG_EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum ReduceError {
    #[error("MissingCell: deal {deal} has no value for {column}")]
    MissingCell { deal: String, column: String },
    #[error("DegenerateData: need at least 2 rows, got {0}")]
    DegenerateData(usize),
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("n_keep = {n_keep} outside 1..={max}")]
    BadKeep { n_keep: usize, max: usize },
    #[error("EmptyLevel: indicator column {0} is all zero")]
    EmptyLevel(usize),
    #[error("EmptyRow: indicator row {0} has no active level")]
    EmptyRow(usize),
    #[error("indicator rows must all sum to the number of variables; row {row} sums to {sum}")]
    RowSumMismatch { row: usize, sum: f64 },
}

/// Indicator matrix, one block of columns per categorical variable.
pub fn one_hot_encode(deals: &[DealRecord], schema: &DatasetSchema) -> Result<Array2<f64>, ReduceError> {
    let width = schema.indicator_width();
    let mut out = Array2::<f64>::zeros((deals.len(), width));
    for (i, d) in deals.iter().enumerate() {
        if d.categorical.len() != schema.categorical_names.len() {
            return Err(ReduceError::ShapeMismatch(format!("deal {} categorical width", d.deal_id)));
        }
        let mut offset = 0;
        for ((value, levels), name) in d.categorical.iter().zip(&schema.categorical_levels).zip(&schema.categorical_names) {
            let value = value
                .as_ref()
                .ok_or_else(|| ReduceError::MissingCell { deal: d.deal_id.clone(), column: name.clone() })?;
            let pos = levels.iter().position(|l| l == value).ok_or_else(|| {
                ReduceError::ShapeMismatch(format!("deal {}: {value:?} is not a level of {name}", d.deal_id))
            })?;
            out[[i, offset + pos]] = 1.0;
            offset += levels.len();
        }
    }
    Ok(out)
}

/// Numeric block as a dense matrix; missing cells are an error.
pub fn numeric_matrix(deals: &[DealRecord], schema: &DatasetSchema) -> Result<Array2<f64>, ReduceError> {
    let m = schema.numeric_names.len();
    let mut out = Array2::<f64>::zeros((deals.len(), m));
    for (i, d) in deals.iter().enumerate() {
        if d.numeric.len() != m {
            return Err(ReduceError::ShapeMismatch(format!("deal {} numeric width", d.deal_id)));
        }
        for (j, v) in d.numeric.iter().enumerate() {
            out[[i, j]] = v.ok_or_else(|| ReduceError::MissingCell {
                deal: d.deal_id.clone(),
                column: schema.numeric_names[j].clone(),
            })?;
        }
    }
    Ok(out)
}

/// Whether PCA divides each centered column by its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    #[default]
    Standardize,
    Center,
}

/// Fitted principal-component map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// Per-column divisor applied after centering (all ones under [`Scaling::Center`]).
    pub scale: Array1<f64>,
    /// `n_keep x m`, orthonormal rows.
    pub components: Array2<f64>,
    /// Variances along the kept components, nonincreasing.
    pub eigenvalues: Array1<f64>,
    /// Full spectrum, kept for explained-variance curves.
    pub all_eigenvalues: Array1<f64>,
    pub total_variance: f64,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.components.ncols()
    }

    fn prepare(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut y = x.to_owned();
        for mut row in y.rows_mut() {
            row -= &self.mean;
            row /= &self.scale;
        }
        y
    }
}

/// Fits PCA on standardized columns.
pub fn pca_fit(x: ArrayView2<f64>, n_keep: usize) -> Result<PcaModel, ReduceError> {
    pca_fit_with(x, n_keep, Scaling::Standardize)
}

/// Fits PCA: centers (and optionally standardizes) the columns, then
/// diagonalizes the sample covariance `YᵀY / (n - 1)`.
///
/// Component rows are sign-fixed so their largest-magnitude entry is positive.
pub fn pca_fit_with(x: ArrayView2<f64>, n_keep: usize, scaling: Scaling) -> Result<PcaModel, ReduceError> {
    let (n, m) = x.dim();
    if n < 2 {
        return Err(ReduceError::DegenerateData(n));
    }
    if n_keep == 0 || n_keep > m {
        return Err(ReduceError::BadKeep { n_keep, max: m });
    }
    let mean = x.mean_axis(Axis(0)).expect("nonempty");
    let mut scale = Array1::<f64>::ones(m);
    if scaling == Scaling::Standardize {
        for j in 0..m {
            let sd = x.column(j).iter().map(|v| (v - mean[j]).powi(2)).sum::<f64>() / (n - 1) as f64;
            let sd = sd.sqrt();
            if sd.is_finite() && sd > 0.0 {
                scale[j] = sd;
            }
        }
    }
    let mut model = PcaModel {
        mean,
        scale,
        components: Array2::zeros((0, m)),
        eigenvalues: Array1::zeros(0),
        all_eigenvalues: Array1::zeros(0),
        total_variance: 0.0,
    };
    let y = model.prepare(x);
    let cov = y.t().dot(&y) / (n - 1) as f64;
    let total_variance = cov.diag().sum();

    let mut eig = symmetric_eigen(cov.view());
    fix_column_signs(&mut eig.vectors);
    let all = eig.values.mapv(|v| if v < 0.0 && v > -NEG_EIGEN_TOL { 0.0 } else { v.max(0.0) });

    model.components = eig.vectors.slice(ndarray::s![.., ..n_keep]).t().to_owned();
    model.eigenvalues = all.slice(ndarray::s![..n_keep]).to_owned();
    model.all_eigenvalues = all;
    model.total_variance = total_variance;
    Ok(model)
}

/// Scores `(x - mean) / scale · componentsᵀ`.
pub fn pca_transform(model: &PcaModel, x: ArrayView2<f64>) -> Result<Array2<f64>, ReduceError> {
    if x.ncols() != model.n_features() {
        return Err(ReduceError::ShapeMismatch(format!(
            "PCA expects {} columns, got {}",
            model.n_features(),
            x.ncols()
        )));
    }
    Ok(model.prepare(x).dot(&model.components.t()))
}

/// Fitted multiple correspondence analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McaModel {
    /// Column masses `c`, summing to 1.
    pub column_masses: Array1<f64>,
    /// Number of categorical variables `Q`; every fit row sums to it.
    pub n_variables: usize,
    /// Right singular vectors `V` of the standardized residual, `J x n_keep`.
    pub axes: Array2<f64>,
    /// Column principal coordinates `Z = D_c^{-1/2} V Σ`, `J x n_keep`.
    pub principal_coordinates: Array2<f64>,
    /// Squared singular values of the kept axes, nonincreasing.
    pub principal_inertias: Array1<f64>,
    /// Nontrivial spectrum (`J - Q` values), kept for explained-inertia curves.
    pub all_inertias: Array1<f64>,
    pub total_inertia: f64,
}

impl McaModel {
    pub fn n_columns(&self) -> usize {
        self.column_masses.len()
    }

    pub fn n_components(&self) -> usize {
        self.axes.ncols()
    }
}

/// Columns of an indicator matrix that contain at least one 1.
pub fn nonempty_columns(x: ArrayView2<f64>) -> Vec<usize> {
    (0..x.ncols()).filter(|&j| x.column(j).iter().any(|&v| v != 0.0)).collect()
}

/// Fits MCA on an indicator matrix without empty columns.
///
/// With `P = X / N`, row masses `r` and column masses `c`, the standardized
/// residual is `Y = D_r^{-1/2} (P - r cᵀ) D_c^{-1/2}`; its right singular
/// vectors and squared singular values (the principal inertias) come from
/// the eigendecomposition of `YᵀY`.
pub fn mca_fit(x: ArrayView2<f64>, n_keep: usize) -> Result<McaModel, ReduceError> {
    mca_fit_transform(x, n_keep).map(|(m, _)| m)
}

/// [`mca_fit`] plus the fit-time row scores `D_r^{-1/2} U Σ`.
pub fn mca_fit_transform(x: ArrayView2<f64>, n_keep: usize) -> Result<(McaModel, Array2<f64>), ReduceError> {
    let (rows, j) = x.dim();
    if rows == 0 || j == 0 {
        return Err(ReduceError::ShapeMismatch("empty indicator matrix".into()));
    }
    let q = x.row(0).sum();
    for (i, row) in x.rows().into_iter().enumerate() {
        let s = row.sum();
        if (s - q).abs() > 1e-9 || s <= 0.0 {
            return Err(ReduceError::RowSumMismatch { row: i, sum: s });
        }
    }
    if let Some(col) = (0..j).find(|&c| x.column(c).iter().all(|&v| v == 0.0)) {
        return Err(ReduceError::EmptyLevel(col));
    }
    let n_variables = q.round() as usize;
    let rank_cap = j.saturating_sub(n_variables);
    if n_keep == 0 || n_keep > rank_cap {
        return Err(ReduceError::BadKeep { n_keep, max: rank_cap });
    }

    let grand = x.sum();
    let p = x.mapv(|v| v / grand);
    let r = p.sum_axis(Axis(1));
    let c = p.sum_axis(Axis(0));
    let mut y = Array2::<f64>::zeros((rows, j));
    for i in 0..rows {
        for k in 0..j {
            y[[i, k]] = (p[[i, k]] - r[i] * c[k]) / (r[i] * c[k]).sqrt();
        }
    }
    let gram = y.t().dot(&y);
    let mut eig = symmetric_eigen(gram.view());
    fix_column_signs(&mut eig.vectors);
    let clamp = |v: f64| if v < 0.0 { 0.0 } else { v };
    let all_inertias = eig.values.slice(ndarray::s![..rank_cap]).mapv(clamp);
    let total_inertia = gram.diag().sum();

    let axes = eig.vectors.slice(ndarray::s![.., ..n_keep]).to_owned();
    let principal_inertias = all_inertias.slice(ndarray::s![..n_keep]).to_owned();
    let mut principal_coordinates = axes.clone();
    for k in 0..j {
        for d in 0..n_keep {
            principal_coordinates[[k, d]] *= principal_inertias[d].sqrt() / c[k].sqrt();
        }
    }

    // U Σ = Y V, so the fit row scores are D_r^{-1/2} Y V.
    let mut row_scores = y.dot(&axes);
    for (i, mut row) in row_scores.rows_mut().into_iter().enumerate() {
        row /= r[i].sqrt();
    }

    let model = McaModel {
        column_masses: c,
        n_variables,
        axes,
        principal_coordinates,
        principal_inertias,
        all_inertias,
        total_inertia,
    };
    Ok((model, row_scores))
}

/// Projects row profiles onto the fitted axes: `(a - c) D_c^{-1/2} V` with
/// `a = x / sum(x)`. Reproduces the fit-time row scores on the fit matrix.
pub fn mca_transform(model: &McaModel, x: ArrayView2<f64>) -> Result<Array2<f64>, ReduceError> {
    let j = model.n_columns();
    if x.ncols() != j {
        return Err(ReduceError::ShapeMismatch(format!("MCA expects {j} columns, got {}", x.ncols())));
    }
    let weights: Vec<f64> = model.column_masses.iter().map(|c| 1.0 / c.sqrt()).collect();
    let mut out = Array2::<f64>::zeros((x.nrows(), model.n_components()));
    let mut centered = vec![0.0; j];
    for (i, row) in x.rows().into_iter().enumerate() {
        let total = row.sum();
        if total <= 0.0 {
            return Err(ReduceError::EmptyRow(i));
        }
        for k in 0..j {
            centered[k] = (row[k] / total - model.column_masses[k]) * weights[k];
        }
        for d in 0..model.n_components() {
            out[[i, d]] = (0..j).map(|k| centered[k] * model.axes[[k, d]]).sum();
        }
    }
    Ok(out)
}

/// Anything with a spectrum whose cumulative share can be plotted.
pub trait Spectrum {
    fn spectrum(&self) -> &Array1<f64>;
    fn total(&self) -> f64;
}

impl Spectrum for PcaModel {
    fn spectrum(&self) -> &Array1<f64> {
        &self.all_eigenvalues
    }
    fn total(&self) -> f64 {
        self.total_variance
    }
}

impl Spectrum for McaModel {
    fn spectrum(&self) -> &Array1<f64> {
        &self.all_inertias
    }
    fn total(&self) -> f64 {
        self.total_inertia
    }
}

/// Cumulative explained variance (PCA) or inertia (MCA) per dimension.
///
/// Dimensions past the point where the curve reaches 1 are dropped, so
/// rank-1 data yields the single point `(1, 1.0)`.
pub fn explained_curve(model: &impl Spectrum) -> Vec<(usize, f64)> {
    explained_curve_from(model.spectrum().as_slice().expect("contiguous"), model.total())
}

pub fn explained_curve_from(values: &[f64], total: f64) -> Vec<(usize, f64)> {
    if total <= 0.0 || values.is_empty() {
        return vec![(1, 1.0)];
    }
    let sum: f64 = values.iter().sum();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        acc += v;
        let frac = (acc / sum).min(1.0);
        let last = i + 1 == values.len() || values[i + 1..].iter().all(|&x| x <= 1e-12 * sum);
        out.push((i + 1, if last { 1.0 } else { frac }));
        if last {
            break;
        }
    }
    out
}
