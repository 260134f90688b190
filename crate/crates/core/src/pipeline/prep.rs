use ndarray::{concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{Framework, FrameworkConfig, PipelineError};
use crate::dataset::{DatasetSchema, DealRecord};
use crate::impute::{fit_imputer, impute, ImputerModel};
use crate::neural::{autoencoder_fit, AutoencoderSpec, LstmAutoencoder};
use crate::reduce::{
    mca_fit, mca_transform, nonempty_columns, numeric_matrix, one_hot_encode, pca_fit, pca_transform, McaModel, PcaModel,
    ReduceError,
};

/// Network-ready inputs for a set of deals.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub tabular: Array2<f64>,
    /// Raw sentiment sequences, present for Framework 3.
    pub sequences: Option<Array2<f64>>,
    pub labels: Vec<u8>,
}

impl Features {
    pub fn select(&self, idx: &[usize]) -> Features {
        Features {
            tabular: self.tabular.select(Axis(0), idx),
            sequences: self.sequences.as_ref().map(|s| s.select(Axis(0), idx)),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Splits row indices into (earlier, latest `fraction`) by announcement date,
/// ties by input order. Both index lists keep input order.
pub fn holdout_split(deals: &[DealRecord], fraction: f64) -> (Vec<usize>, Vec<usize>) {
    let n_valid = (fraction * deals.len() as f64).floor() as usize;
    let mut order: Vec<usize> = (0..deals.len()).collect();
    order.sort_by_key(|&i| (deals[i].announce_date, i));
    let mut is_valid = vec![false; deals.len()];
    for &i in &order[deals.len() - n_valid..] {
        is_valid[i] = true;
    }
    let (valid, fit): (Vec<usize>, Vec<usize>) = (0..deals.len()).partition(|&i| is_valid[i]);
    (fit, valid)
}

fn sentiment_matrix(deals: &[DealRecord], length: usize) -> Result<Array2<f64>, PipelineError> {
    let mut out = Array2::zeros((deals.len(), length));
    for (i, d) in deals.iter().enumerate() {
        let s = d.sentiment.as_ref().ok_or_else(|| PipelineError::MissingSentiment(d.deal_id.clone()))?;
        if s.len() != length {
            return Err(PipelineError::MissingSentiment(format!("{} (length {} != {length})", d.deal_id, s.len())));
        }
        for (j, v) in s.iter().enumerate() {
            out[[i, j]] = *v;
        }
    }
    Ok(out)
}

fn keep_error(e: ReduceError, what: &str) -> PipelineError {
    match e {
        ReduceError::BadKeep { n_keep, max } => {
            PipelineError::BadConfig(format!("{what} = {n_keep} exceeds the {max} components this data supports"))
        }
        other => other.into(),
    }
}

/// Every transform fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPreprocessor {
    pub framework: Framework,
    pub schema: DatasetSchema,
    pub imputer: ImputerModel,
    pub pca: PcaModel,
    /// Indicator columns with at least one training observation.
    pub mca_columns: Vec<usize>,
    pub mca: McaModel,
    pub autoencoder: Option<LstmAutoencoder>,
    pub feature_mean: Option<Vec<f64>>,
    pub feature_scale: Option<Vec<f64>>,
}

impl FittedPreprocessor {
    /// Fits imputation, PCA, MCA, the autoencoder (F2) and the feature scaler
    /// on `train`, and returns the transformed training features.
    pub fn fit(
        train: &[DealRecord],
        schema: &DatasetSchema,
        cfg: &FrameworkConfig,
    ) -> Result<(FittedPreprocessor, Features), PipelineError> {
        schema.validate()?;
        let uses_sentiment = cfg.framework.uses_sentiment();
        let sequences = if uses_sentiment { Some(sentiment_matrix(train, schema.sentiment_length)?) } else { None };
        if cfg.pca_dims > schema.numeric_names.len() {
            return Err(PipelineError::BadConfig(format!(
                "pca_dims = {} exceeds the {} numeric columns",
                cfg.pca_dims,
                schema.numeric_names.len()
            )));
        }

        let imputer = fit_imputer(train, schema, cfg.impute_k)?;
        let imputed = impute(&imputer, train)?;
        let numeric = numeric_matrix(&imputed, schema)?;
        let pca = pca_fit(numeric.view(), cfg.pca_dims).map_err(|e| keep_error(e, "pca_dims"))?;
        let indicators = one_hot_encode(&imputed, schema)?;
        let mca_columns = nonempty_columns(indicators.view());
        let kept = indicators.select(Axis(1), &mca_columns);
        let mca = mca_fit(kept.view(), cfg.mca_dims).map_err(|e| keep_error(e, "mca_dims"))?;

        let autoencoder = match (cfg.framework, &sequences) {
            (Framework::F2, Some(seq)) => {
                let spec = AutoencoderSpec {
                    sequence_length: schema.sentiment_length,
                    embedding_dim: cfg.embedding_dim,
                    ..cfg.autoencoder.clone()
                };
                Some(autoencoder_fit(&spec, seq.view(), None, &cfg.autoencoder_train)?)
            }
            _ => None,
        };

        let mut model = FittedPreprocessor {
            framework: cfg.framework,
            schema: schema.clone(),
            imputer,
            pca,
            mca_columns,
            mca,
            autoencoder,
            feature_mean: None,
            feature_scale: None,
        };
        let mut features = model.raw_features(&imputed, sequences)?;
        if cfg.standardize_features {
            let n = features.tabular.nrows() as f64;
            let mean = features.tabular.mean_axis(Axis(0)).expect("nonempty train").to_vec();
            let scale: Vec<f64> = features
                .tabular
                .columns()
                .into_iter()
                .zip(&mean)
                .map(|(c, m)| {
                    let var = c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0).max(1.0);
                    if var > 1e-24 {
                        var.sqrt()
                    } else {
                        1.0
                    }
                })
                .collect();
            model.feature_mean = Some(mean);
            model.feature_scale = Some(scale);
            model.scale(&mut features.tabular);
        }
        Ok((model, features))
    }

    fn scale(&self, x: &mut Array2<f64>) {
        if let (Some(mean), Some(scale)) = (&self.feature_mean, &self.feature_scale) {
            for mut row in x.rows_mut() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = (*v - mean[j]) / scale[j];
                }
            }
        }
    }

    fn raw_features(&self, imputed: &[DealRecord], sequences: Option<Array2<f64>>) -> Result<Features, PipelineError> {
        let numeric = numeric_matrix(imputed, &self.schema)?;
        let pca_scores = pca_transform(&self.pca, numeric.view())?;
        let indicators = one_hot_encode(imputed, &self.schema)?.select(Axis(1), &self.mca_columns);
        let mca_scores = mca_transform(&self.mca, indicators.view())?;
        let mut tabular = concatenate(Axis(1), &[pca_scores.view(), mca_scores.view()]).expect("row counts agree");
        let mut sequences = sequences;
        if let (Some(ae), Some(seq)) = (&self.autoencoder, &sequences) {
            let embedding = ae.encode(seq.view())?;
            tabular = concatenate(Axis(1), &[tabular.view(), embedding.view()]).expect("row counts agree");
        }
        if self.framework != Framework::F3 {
            sequences = None;
        }
        let tabular = tabular.as_standard_layout().into_owned();
        Ok(Features { tabular, sequences, labels: imputed.iter().map(|d| d.label).collect() })
    }

    /// Applies the fitted transforms to any deals.
    pub fn transform(&self, deals: &[DealRecord]) -> Result<Features, PipelineError> {
        let sequences = if self.framework.uses_sentiment() {
            Some(sentiment_matrix(deals, self.schema.sentiment_length)?)
        } else {
            None
        };
        let imputed = impute(&self.imputer, deals)?;
        let mut features = self.raw_features(&imputed, sequences)?;
        self.scale(&mut features.tabular);
        Ok(features)
    }

    /// Width of the tabular block fed to the network.
    pub fn tabular_width(&self) -> usize {
        self.pca.n_components()
            + self.mca.n_components()
            + self.autoencoder.as_ref().map_or(0, |a| a.spec.embedding_dim)
    }
}
