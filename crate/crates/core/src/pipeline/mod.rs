//! The three classification frameworks, logit baselines and seeded
//! hyperparameter search.
//!
//! * Framework 1: PCA(numeric) ⊕ MCA(indicators) → optional SMOTE → FFNN.
//! * Framework 2: as F1 plus a frozen LSTM-autoencoder embedding of the
//!   sentiment sequence.
//! * Framework 3: FFNN on the reduced tabular block and an LSTM on the raw
//!   sequence, merged into a second FFNN and trained jointly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DatasetError;
use crate::impute::{ImputeError, DEFAULT_K};
use crate::metrics::{EvalReport, MetricsError};
use crate::neural::{Activation, AutoencoderSpec, LayerKind, LayerSpec, LossKind, NetworkSpec, NeuralError, TrainConfig};
use crate::reduce::{ReduceError, DEFAULT_MCA_DIMS, DEFAULT_PCA_DIMS};
use crate::resample::{ResampleError, SmoteConfig};
use crate::rng::derive_seed;

mod prep;
mod run;
mod search;

pub use prep::{holdout_split, Features, FittedPreprocessor};
pub use run::{
    class_weights, fit_logit, run_framework, run_framework1, run_framework2, run_framework3, ModelBundle, ModelKind,
    RunOutput,
};
pub use search::{hyper_search, SearchConfig, SearchOutcome, SearchSpace, SearchStrategy, TrialResult};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("MissingSentiment: deal {0} has no sentiment sequence")]
    MissingSentiment(String),
    #[error("EmptySpace: {0}")]
    EmptySpace(String),
    #[error("dataset stage: {0}")]
    Dataset(#[from] DatasetError),
    #[error("impute stage: {0}")]
    Impute(#[from] ImputeError),
    #[error("reduce stage: {0}")]
    Reduce(#[from] ReduceError),
    #[error("smote stage: {0}")]
    Resample(#[from] ResampleError),
    #[error("neural stage: {0}")]
    Neural(#[from] NeuralError),
    #[error("metrics stage: {0}")]
    Metrics(#[from] MetricsError),
}

impl PipelineError {
    /// Whether the error stems from the configuration rather than the data.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            PipelineError::BadConfig(_)
                | PipelineError::EmptySpace(_)
                | PipelineError::Neural(NeuralError::BadConfig(_))
                | PipelineError::Resample(ResampleError::BadConfig(_))
                | PipelineError::Impute(ImputeError::BadK)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Framework {
    #[default]
    F1,
    F2,
    F3,
}

impl Framework {
    pub fn uses_sentiment(self) -> bool {
        self != Framework::F1
    }
}

/// Model-selection target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Recall,
    Accuracy,
    F1,
}

impl Objective {
    pub fn value(self, report: &EvalReport) -> Option<f64> {
        match self {
            Objective::Recall => report.recall,
            Objective::Accuracy => Some(report.accuracy),
            Objective::F1 => report.f1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Recall => "recall",
            Objective::Accuracy => "accuracy",
            Objective::F1 => "f1",
        }
    }
}

/// Framework 3's sequence reader and merge head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceBranch {
    pub lstm_width: usize,
    #[serde(default)]
    pub head: Vec<LayerSpec>,
}

impl Default for SequenceBranch {
    fn default() -> Self {
        SequenceBranch { lstm_width: 16, head: vec![LayerSpec::dense(16, Activation::Selu)] }
    }
}

fn default_pca() -> usize {
    DEFAULT_PCA_DIMS
}
fn default_mca() -> usize {
    DEFAULT_MCA_DIMS
}
fn default_embedding() -> usize {
    5
}
fn default_k() -> usize {
    DEFAULT_K
}
fn default_fraction() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}
fn default_network() -> NetworkSpec {
    NetworkSpec { layers: vec![LayerSpec::dense(64, Activation::Selu)], loss: LossKind::CrossEntropy, seed: 0 }
}
fn default_ae_train() -> TrainConfig {
    TrainConfig { epochs: 20, learning_rate: 5e-3, ..Default::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameworkConfig {
    #[serde(default)]
    pub framework: Framework,
    #[serde(default = "default_pca")]
    pub pca_dims: usize,
    #[serde(default = "default_mca")]
    pub mca_dims: usize,
    #[serde(default = "default_embedding")]
    pub embedding_dim: usize,
    #[serde(default)]
    pub use_smote: bool,
    #[serde(default)]
    pub smote: SmoteConfig,
    /// Hidden layers and loss. In F3 these are the tabular branch layers.
    #[serde(default = "default_network")]
    pub network: NetworkSpec,
    #[serde(default)]
    pub sequence_branch: Option<SequenceBranch>,
    #[serde(default)]
    pub autoencoder: AutoencoderSpec,
    #[serde(default = "default_ae_train")]
    pub autoencoder_train: TrainConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default = "default_k")]
    pub impute_k: usize,
    /// Share of the latest training deals held out for early stopping.
    #[serde(default = "default_fraction")]
    pub validation_fraction: f64,
    /// Z-score the reduced features with training statistics before the network.
    #[serde(default = "default_true")]
    pub standardize_features: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for FrameworkConfig {
    fn default() -> Self {
        FrameworkConfig {
            framework: Framework::F1,
            pca_dims: default_pca(),
            mca_dims: default_mca(),
            embedding_dim: default_embedding(),
            use_smote: false,
            smote: SmoteConfig::default(),
            network: default_network(),
            sequence_branch: None,
            autoencoder: AutoencoderSpec::default(),
            autoencoder_train: default_ae_train(),
            train: TrainConfig::default(),
            objective: Objective::Recall,
            impute_k: default_k(),
            validation_fraction: default_fraction(),
            standardize_features: true,
            seed: 0,
        }
    }
}

impl FrameworkConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::BadConfig(m));
        if self.pca_dims == 0 || self.mca_dims == 0 {
            return bad("pca_dims and mca_dims must be positive".into());
        }
        if self.framework == Framework::F2 && self.embedding_dim == 0 {
            return bad("embedding_dim must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!("validation_fraction {} not in [0, 1)", self.validation_fraction));
        }
        if self.impute_k == 0 {
            return bad("impute_k must be at least 1".into());
        }
        self.network.validate()?;
        self.train.validate()?;
        if self.network.layers.iter().any(|l| l.kind == LayerKind::Lstm) {
            return bad("network layers must be dense; F3's recurrent reader goes in sequence_branch".into());
        }
        match (self.framework, &self.sequence_branch) {
            (Framework::F3, None) => return bad("framework f3 requires sequence_branch".into()),
            (Framework::F3, Some(b)) => {
                if b.lstm_width == 0 || b.head.iter().any(|l| l.width == 0 || l.kind == LayerKind::Lstm) {
                    return bad("sequence_branch needs lstm_width > 0 and dense head layers".into());
                }
            }
            _ => {}
        }
        if self.framework == Framework::F2 {
            self.autoencoder_train.validate()?;
        }
        Ok(())
    }

    /// Copy with every sub-seed derived from `seed`.
    pub fn resolved(&self) -> FrameworkConfig {
        let mut c = self.clone();
        c.autoencoder.embedding_dim = c.embedding_dim;
        c.autoencoder.seed = derive_seed(c.seed, 1);
        c.autoencoder_train.seed = derive_seed(c.seed, 2);
        c.smote.seed = derive_seed(c.seed, 3);
        c.network.seed = derive_seed(c.seed, 4);
        c.train.seed = derive_seed(c.seed, 5);
        c
    }
}

/// A named starting configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub config: FrameworkConfig,
}

fn dense(spec: &[(usize, Activation)]) -> Vec<LayerSpec> {
    spec.iter().map(|&(w, a)| LayerSpec::dense(w, a)).collect()
}

/// Architectures reported for each framework and model family.
pub fn presets() -> Vec<Preset> {
    use Activation::{Elu, Relu, Selu};
    let ff = |framework, use_smote, objective, layers: &[(usize, Activation)], loss| FrameworkConfig {
        framework,
        use_smote,
        objective,
        network: NetworkSpec { layers: dense(layers), loss, seed: 0 },
        ..Default::default()
    };
    let joint = |use_smote, objective, tab: (usize, Activation), head: (usize, Activation), loss| FrameworkConfig {
        framework: Framework::F3,
        use_smote,
        objective,
        network: NetworkSpec { layers: dense(&[tab]), loss, seed: 0 },
        sequence_branch: Some(SequenceBranch { lstm_width: 16, head: dense(&[head]) }),
        ..Default::default()
    };
    let (f1, f2) = (Framework::F1, Framework::F2);
    let (rec, acc, f1o) = (Objective::Recall, Objective::Accuracy, Objective::F1);
    let (ce, f1l) = (LossKind::CrossEntropy, LossKind::F1);
    let entries = vec![
        ("f1-nn-recall", ff(f1, false, rec, &[(64, Selu)], ce)),
        ("f1-nn-accuracy", ff(f1, false, acc, &[(128, Relu), (8, Relu)], ce)),
        ("f1-nn-f1", ff(f1, false, f1o, &[(256, Relu), (8, Relu)], f1l)),
        ("f1-smote-nn-recall", ff(f1, true, rec, &[(8, Elu)], LossKind::focal())),
        ("f1-smote-nn-accuracy", ff(f1, true, acc, &[(256, Relu)], ce)),
        ("f1-smote-nn-f1", ff(f1, true, f1o, &[(8, Selu)], f1l)),
        ("f2-nn-recall", ff(f2, false, rec, &[(32, Selu)], LossKind::focal())),
        ("f2-nn-accuracy", ff(f2, false, acc, &[(64, Relu)], LossKind::focal())),
        ("f2-nn-f1", ff(f2, false, f1o, &[(32, Elu)], f1l)),
        ("f2-smote-nn-recall", ff(f2, true, rec, &[(32, Selu), (32, Elu)], LossKind::tversky())),
        ("f2-smote-nn-accuracy", ff(f2, true, acc, &[(32, Selu), (8, Selu)], ce)),
        ("f2-smote-nn-f1", ff(f2, true, f1o, &[(32, Selu), (16, Selu)], f1l)),
        ("f3-nn-recall", joint(false, rec, (4, Selu), (8, Selu), f1l)),
        ("f3-nn-accuracy", joint(false, acc, (4, Elu), (16, Elu), LossKind::focal())),
        ("f3-nn-f1", joint(false, f1o, (4, Elu), (16, Elu), LossKind::focal())),
        ("f3-smote-nn-recall", joint(true, rec, (4, Selu), (16, Selu), f1l)),
        ("f3-smote-nn-accuracy", joint(true, acc, (64, Selu), (64, Relu), LossKind::tversky())),
        ("f3-smote-nn-f1", joint(true, f1o, (64, Selu), (64, Relu), LossKind::tversky())),
    ];
    entries.into_iter().map(|(name, config)| Preset { name: name.to_string(), config }).collect()
}

pub fn preset(name: &str) -> Option<FrameworkConfig> {
    presets().into_iter().find(|p| p.name == name).map(|p| p.config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        let all = presets();
        assert_eq!(all.len(), 18);
        for p in &all {
            p.config.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
        let f1 = preset("f1-smote-nn-f1").unwrap();
        assert_eq!(f1.network.layers, vec![LayerSpec::dense(8, Activation::Selu)]);
        assert_eq!(f1.network.loss, LossKind::F1);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: FrameworkConfig = serde_json::from_str(r#"{"framework":"f2"}"#).unwrap();
        assert_eq!(cfg.pca_dims, 20);
        assert_eq!(cfg.mca_dims, 45);
        assert_eq!(cfg.embedding_dim, 5);
        assert_eq!(cfg.train.batch_size, 64);
        let zero = FrameworkConfig { framework: Framework::F2, embedding_dim: 0, ..Default::default() };
        assert!(matches!(zero.validate(), Err(PipelineError::BadConfig(_))));
        let f3 = FrameworkConfig { framework: Framework::F3, ..Default::default() };
        assert!(f3.validate().is_err());
    }

    #[test]
    fn resolved_seeds_differ_by_stream() {
        let r = FrameworkConfig { seed: 9, ..Default::default() }.resolved();
        assert_ne!(r.network.seed, r.train.seed);
        assert_eq!(r, FrameworkConfig { seed: 9, ..Default::default() }.resolved());
    }
}
