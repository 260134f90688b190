use ndarray::{concatenate, s, Axis};
use serde::{Deserialize, Serialize};

use super::prep::{holdout_split, Features, FittedPreprocessor};
use super::{Framework, FrameworkConfig, PipelineError};
use crate::dataset::{DatasetSchema, DealRecord};
use crate::metrics::{evaluate, EvalReport, PrArea};
use crate::neural::{train_architecture, Architecture, Inputs, LabeledData, LossKind, NetworkSpec, TrainedNetwork};
use crate::resample::{smote, SmoteConfig};

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    F1,
    F2,
    F3,
    Logit,
    WeightedLogit,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::F1 => "f1",
            ModelKind::F2 => "f2",
            ModelKind::F3 => "f3",
            ModelKind::Logit => "logit",
            ModelKind::WeightedLogit => "weighted-logit",
        }
    }
}

/// Everything needed to score new deals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub version: u32,
    pub kind: ModelKind,
    pub config: FrameworkConfig,
    pub preprocessor: FittedPreprocessor,
    pub network: TrainedNetwork,
}

impl ModelBundle {
    pub fn predict(&self, deals: &[DealRecord]) -> Result<Vec<f64>, PipelineError> {
        let features = self.preprocessor.transform(deals)?;
        Ok(self.network.predict(&inputs_of(&features))?)
    }

    /// Width of the network's tabular input.
    pub fn input_width(&self) -> usize {
        self.preprocessor.tabular_width()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub bundle: ModelBundle,
    /// Scored on the original (never oversampled) training rows.
    pub in_sample: EvalReport,
    pub out_of_sample: EvalReport,
}

fn inputs_of(f: &Features) -> Inputs<'_> {
    Inputs { tabular: Some(f.tabular.view()), sequences: f.sequences.as_ref().map(|s| s.view()) }
}

/// Per-class weights `N / (2 N_c)`, averaging to one over the samples.
pub fn class_weights(labels: &[u8]) -> [f64; 2] {
    let n = labels.len() as f64;
    let ones = labels.iter().filter(|&&l| l == 1).count() as f64;
    let zeros = n - ones;
    let w = |c: f64| if c > 0.0 { n / (2.0 * c) } else { 1.0 };
    [w(zeros), w(ones)]
}

fn oversample(f: Features, cfg: &SmoteConfig) -> Result<Features, PipelineError> {
    let width = f.tabular.ncols();
    let joined = match &f.sequences {
        Some(seq) => concatenate(Axis(1), &[f.tabular.view(), seq.view()]).expect("row counts agree"),
        None => f.tabular.clone(),
    };
    let out = smote(joined.view(), &f.labels, cfg)?;
    let tabular = out.features.slice(s![.., ..width]).to_owned();
    let sequences = f.sequences.as_ref().map(|_| out.features.slice(s![.., width..]).to_owned());
    Ok(Features { tabular, sequences, labels: out.labels })
}

fn check_sentiment(deals: &[DealRecord], length: usize) -> Result<(), PipelineError> {
    match deals.iter().find(|d| d.sentiment.as_ref().is_none_or(|s| s.len() != length)) {
        Some(d) => Err(PipelineError::MissingSentiment(d.deal_id.clone())),
        None => Ok(()),
    }
}

fn report(labels: &[u8], scores: &[f64], threshold: f64) -> Result<EvalReport, PipelineError> {
    Ok(evaluate(labels, scores, threshold, PrArea::Step)?)
}

struct Fitted {
    prep: FittedPreprocessor,
    features: Features,
    fit: Features,
    valid: Option<Features>,
}

fn prepare(train: &[DealRecord], test: &[DealRecord], schema: &DatasetSchema, cfg: &FrameworkConfig) -> Result<Fitted, PipelineError> {
    if train.is_empty() || test.is_empty() {
        return Err(PipelineError::BadConfig("train and test must both be nonempty".into()));
    }
    if cfg.framework.uses_sentiment() {
        check_sentiment(train, schema.sentiment_length)?;
        check_sentiment(test, schema.sentiment_length)?;
    }
    let (prep, features) = FittedPreprocessor::fit(train, schema, cfg)?;
    let (fit_idx, valid_idx) = holdout_split(train, cfg.validation_fraction);
    let fit = features.select(&fit_idx);
    let valid = (!valid_idx.is_empty()).then(|| features.select(&valid_idx));
    Ok(Fitted { prep, features, fit, valid })
}

fn finish(
    kind: ModelKind,
    cfg: FrameworkConfig,
    fitted: Fitted,
    network: TrainedNetwork,
    test: &[DealRecord],
) -> Result<RunOutput, PipelineError> {
    let threshold = cfg.train.threshold;
    let train_scores = network.predict(&inputs_of(&fitted.features))?;
    let in_sample = report(&fitted.features.labels, &train_scores, threshold)?;
    let test_features = fitted.prep.transform(test)?;
    let test_scores = network.predict(&inputs_of(&test_features))?;
    let out_of_sample = report(&test_features.labels, &test_scores, threshold)?;
    let bundle = ModelBundle { version: BUNDLE_VERSION, kind, config: cfg, preprocessor: fitted.prep, network };
    Ok(RunOutput { bundle, in_sample, out_of_sample })
}

/// Runs the framework selected in `cfg`: preprocessing fitted on `train`,
/// optional SMOTE on the non-holdout training rows, network training with
/// early stopping on the latest training deals, reports on train and test.
pub fn run_framework(
    train: &[DealRecord],
    test: &[DealRecord],
    schema: &DatasetSchema,
    cfg: &FrameworkConfig,
) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let fitted = prepare(train, test, schema, &cfg)?;
    let width = fitted.prep.tabular_width();
    let arch = match cfg.framework {
        Framework::F1 | Framework::F2 => Architecture::FeedForward { input: width, layers: cfg.network.layers.clone() },
        Framework::F3 => {
            let branch = cfg.sequence_branch.clone().expect("validated");
            Architecture::Joint {
                tabular_input: width,
                tabular: cfg.network.layers.clone(),
                lstm_width: branch.lstm_width,
                head: branch.head,
            }
        }
    };
    let fit = if cfg.use_smote { oversample(fitted.fit.clone(), &cfg.smote)? } else { fitted.fit.clone() };
    let train_data = LabeledData::new(inputs_of(&fit), &fit.labels);
    let valid_data = fitted.valid.as_ref().map(|v| LabeledData::new(inputs_of(v), &v.labels));
    let network =
        train_architecture(&arch, cfg.network.loss, cfg.network.seed, &train_data, valid_data.as_ref(), &cfg.train)?;
    let kind = match cfg.framework {
        Framework::F1 => ModelKind::F1,
        Framework::F2 => ModelKind::F2,
        Framework::F3 => ModelKind::F3,
    };
    finish(kind, cfg, fitted, network, test)
}

fn with_framework(cfg: &FrameworkConfig, framework: Framework) -> FrameworkConfig {
    FrameworkConfig { framework, ..cfg.clone() }
}

pub fn run_framework1(train: &[DealRecord], test: &[DealRecord], schema: &DatasetSchema, cfg: &FrameworkConfig) -> Result<RunOutput, PipelineError> {
    run_framework(train, test, schema, &with_framework(cfg, Framework::F1))
}

pub fn run_framework2(train: &[DealRecord], test: &[DealRecord], schema: &DatasetSchema, cfg: &FrameworkConfig) -> Result<RunOutput, PipelineError> {
    run_framework(train, test, schema, &with_framework(cfg, Framework::F2))
}

pub fn run_framework3(train: &[DealRecord], test: &[DealRecord], schema: &DatasetSchema, cfg: &FrameworkConfig) -> Result<RunOutput, PipelineError> {
    run_framework(train, test, schema, &with_framework(cfg, Framework::F3))
}

/// Logistic regression on the Framework 1 features: a single sigmoid unit
/// trained with cross-entropy, optionally with class weights `N / (2 N_c)`.
pub fn fit_logit(
    train: &[DealRecord],
    test: &[DealRecord],
    schema: &DatasetSchema,
    cfg: &FrameworkConfig,
    use_class_weights: bool,
) -> Result<RunOutput, PipelineError> {
    let base = FrameworkConfig {
        framework: Framework::F1,
        use_smote: false,
        network: NetworkSpec { layers: Vec::new(), loss: LossKind::CrossEntropy, seed: cfg.network.seed },
        sequence_branch: None,
        ..cfg.clone()
    };
    base.validate()?;
    let cfg = base.resolved();
    let fitted = prepare(train, test, schema, &cfg)?;
    let arch = Architecture::FeedForward { input: fitted.prep.tabular_width(), layers: Vec::new() };
    let weights: Option<Vec<f64>> = use_class_weights.then(|| {
        let w = class_weights(&fitted.fit.labels);
        fitted.fit.labels.iter().map(|&l| w[l as usize]).collect()
    });
    let train_data =
        LabeledData { inputs: inputs_of(&fitted.fit), labels: &fitted.fit.labels, weights: weights.as_deref() };
    let valid_data = fitted.valid.as_ref().map(|v| LabeledData::new(inputs_of(v), &v.labels));
    let network =
        train_architecture(&arch, LossKind::CrossEntropy, cfg.network.seed, &train_data, valid_data.as_ref(), &cfg.train)?;
    let kind = if use_class_weights { ModelKind::WeightedLogit } else { ModelKind::Logit };
    finish(kind, cfg, fitted, network, test)
}
