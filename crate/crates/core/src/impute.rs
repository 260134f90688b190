//! k-nearest-neighbour imputation of missing numeric and categorical cells.
//!
//! Distances use only the numeric coordinates observed in both rows, each
//! divided by the column's training standard deviation, and are rescaled by
//! `sqrt(D / d)` where `D` is the number of usable numeric columns and `d`
//! the number jointly observed. For every missing cell the `k` nearest
//! references that observe that column vote: numeric cells take their mean,
//! categorical cells their majority level.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetSchema, DealRecord};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum ImputeError {
    #[error("BadK: k must be at least 1")]
    BadK,
    #[error("TooFewRows: k = {k} but only {usable} reference rows have an observed numeric value")]
    TooFewRows { k: usize, usable: usize },
    #[error("NoComparableRow: deal {0} shares no observed numeric column with any reference")]
    NoComparableRow(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

/// Reference rows and column scales captured at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputerModel {
    pub k: usize,
    reference_numeric: Vec<Vec<Option<f64>>>,
    reference_categorical: Vec<Vec<Option<String>>>,
    numeric_scale: Vec<f64>,
    /// Columns with at least one observed training value; the rest stay out of distances.
    usable: Vec<bool>,
    categorical_levels: Vec<Vec<String>>,
}

impl ImputerModel {
    pub fn n_references(&self) -> usize {
        self.reference_numeric.len()
    }

    pub fn numeric_scale(&self) -> &[f64] {
        &self.numeric_scale
    }

    /// Partial distance between a query row and reference `r`, `None` when no
    /// usable column is observed in both.
    fn distance(&self, query: &[Option<f64>], r: usize, n_usable: usize) -> Option<f64> {
        let mut sum = 0.0;
        let mut joint = 0usize;
        for (j, (q, x)) in query.iter().zip(&self.reference_numeric[r]).enumerate() {
            if !self.usable[j] {
                continue;
            }
            if let (Some(q), Some(x)) = (q, x) {
                let d = (q - x) / self.numeric_scale[j];
                sum += d * d;
                joint += 1;
            }
        }
        (joint > 0).then(|| (sum * n_usable as f64 / joint as f64).sqrt())
    }
}

/// Stores the training rows as references. Nothing is imputed at fit time.
pub fn fit_imputer(train: &[DealRecord], schema: &DatasetSchema, k: usize) -> Result<ImputerModel, ImputeError> {
    if k == 0 {
        return Err(ImputeError::BadK);
    }
    let m = schema.numeric_names.len();
    for d in train {
        check_shape(d, schema)?;
    }
    let usable_rows = train.iter().filter(|d| d.numeric.iter().any(Option::is_some)).count();
    if usable_rows < k {
        return Err(ImputeError::TooFewRows { k, usable: usable_rows });
    }

    let mut numeric_scale = vec![1.0; m];
    let mut usable = vec![false; m];
    for j in 0..m {
        let observed: Vec<f64> = train.iter().filter_map(|d| d.numeric[j]).collect();
        usable[j] = !observed.is_empty();
        if observed.len() >= 2 {
            let mean = observed.iter().sum::<f64>() / observed.len() as f64;
            let var = observed.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (observed.len() - 1) as f64;
            let sd = var.sqrt();
            if sd.is_finite() && sd > 0.0 {
                numeric_scale[j] = sd;
            }
        }
    }

    Ok(ImputerModel {
        k,
        reference_numeric: train.iter().map(|d| d.numeric.clone()).collect(),
        reference_categorical: train.iter().map(|d| d.categorical.clone()).collect(),
        numeric_scale,
        usable,
        categorical_levels: schema.categorical_levels.clone(),
    })
}

fn check_shape(d: &DealRecord, schema: &DatasetSchema) -> Result<(), ImputeError> {
    if d.numeric.len() != schema.numeric_names.len() || d.categorical.len() != schema.categorical_names.len() {
        return Err(ImputeError::SchemaMismatch(format!("deal {} does not match the schema width", d.deal_id)));
    }
    Ok(())
}

/// Returns copies of `deals` with every missing cell filled.
///
/// Observed cells are never modified. A numeric column never observed in
/// training is filled with 0.
pub fn impute(model: &ImputerModel, deals: &[DealRecord]) -> Result<Vec<DealRecord>, ImputeError> {
    deals.iter().map(|d| impute_one(model, d)).collect()
}

fn impute_one(model: &ImputerModel, deal: &DealRecord) -> Result<DealRecord, ImputeError> {
    if deal.numeric.len() != model.usable.len() || deal.categorical.len() != model.categorical_levels.len() {
        return Err(ImputeError::SchemaMismatch(format!("deal {} does not match the imputer width", deal.deal_id)));
    }
    if !deal.has_missing() {
        return Ok(deal.clone());
    }

    let n_usable = model.usable.iter().filter(|&&u| u).count();
    let mut ranked: Vec<(f64, usize)> = (0..model.n_references())
        .filter_map(|r| model.distance(&deal.numeric, r, n_usable).map(|d| (d, r)))
        .collect();
    if ranked.is_empty() {
        return Err(ImputeError::NoComparableRow(deal.deal_id.clone()));
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut out = deal.clone();
    for (j, cell) in out.numeric.iter_mut().enumerate() {
        if cell.is_some() {
            continue;
        }
        let values: Vec<f64> = ranked
            .iter()
            .filter_map(|&(_, r)| model.reference_numeric[r][j])
            .take(model.k)
            .collect();
        *cell = Some(if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 });
    }

    for (j, cell) in out.categorical.iter_mut().enumerate() {
        if cell.is_some() {
            continue;
        }
        let levels = &model.categorical_levels[j];
        let mut votes = vec![0usize; levels.len()];
        for label in ranked
            .iter()
            .filter_map(|&(_, r)| model.reference_categorical[r][j].as_ref())
            .take(model.k)
        {
            if let Some(pos) = levels.iter().position(|l| l == label) {
                votes[pos] += 1;
            }
        }
        // Highest vote wins; earlier schema level wins ties.
        let best = votes
            .iter()
            .enumerate()
            .fold(0usize, |best, (i, &v)| if v > votes[best] { i } else { best });
        *cell = Some(levels[best].clone());
    }
    Ok(out)
}
