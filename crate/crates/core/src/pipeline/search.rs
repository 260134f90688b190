//! Seeded random and grid search over framework configurations.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::prep::holdout_split;
use super::run::{run_framework, RunOutput};
use super::{FrameworkConfig, Objective, PipelineError};
use crate::dataset::{DatasetSchema, DealRecord};
use crate::metrics::EvalReport;
use crate::neural::{LayerSpec, LossKind};
use crate::rng::{derive_seed, seeded};

/// Candidate values per field; absent fields keep the base config's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    pub hidden_layers: Option<Vec<Vec<LayerSpec>>>,
    pub loss: Option<Vec<LossKind>>,
    pub learning_rate: Option<Vec<f64>>,
    pub batch_size: Option<Vec<usize>>,
    pub epochs: Option<Vec<usize>>,
    pub use_smote: Option<Vec<bool>>,
    pub smote_target_ratio: Option<Vec<f64>>,
    pub pca_dims: Option<Vec<usize>>,
    pub mca_dims: Option<Vec<usize>>,
    pub embedding_dim: Option<Vec<usize>>,
    pub lstm_width: Option<Vec<usize>>,
}

impl SearchSpace {
    /// Number of candidates per declared field, in a fixed field order.
    fn sizes(&self) -> Vec<usize> {
        vec![
            self.hidden_layers.as_ref().map_or(1, Vec::len),
            self.loss.as_ref().map_or(1, Vec::len),
            self.learning_rate.as_ref().map_or(1, Vec::len),
            self.batch_size.as_ref().map_or(1, Vec::len),
            self.epochs.as_ref().map_or(1, Vec::len),
            self.use_smote.as_ref().map_or(1, Vec::len),
            self.smote_target_ratio.as_ref().map_or(1, Vec::len),
            self.pca_dims.as_ref().map_or(1, Vec::len),
            self.mca_dims.as_ref().map_or(1, Vec::len),
            self.embedding_dim.as_ref().map_or(1, Vec::len),
            self.lstm_width.as_ref().map_or(1, Vec::len),
        ]
    }

    pub fn grid_size(&self) -> usize {
        self.sizes().iter().product()
    }

    fn apply(&self, base: &FrameworkConfig, choice: &[usize]) -> FrameworkConfig {
        let mut c = base.clone();
        fn pick<T: Clone>(v: &Option<Vec<T>>, i: usize) -> Option<T> {
            v.as_ref().map(|v| v[i].clone())
        }
        if let Some(v) = pick(&self.hidden_layers, choice[0]) {
            c.network.layers = v;
        }
        if let Some(v) = pick(&self.loss, choice[1]) {
            c.network.loss = v;
        }
        if let Some(v) = pick(&self.learning_rate, choice[2]) {
            c.train.learning_rate = v;
        }
        if let Some(v) = pick(&self.batch_size, choice[3]) {
            c.train.batch_size = v;
        }
        if let Some(v) = pick(&self.epochs, choice[4]) {
            c.train.epochs = v;
        }
        if let Some(v) = pick(&self.use_smote, choice[5]) {
            c.use_smote = v;
        }
        if let Some(v) = pick(&self.smote_target_ratio, choice[6]) {
            c.smote.target_ratio = v;
        }
        if let Some(v) = pick(&self.pca_dims, choice[7]) {
            c.pca_dims = v;
        }
        if let Some(v) = pick(&self.mca_dims, choice[8]) {
            c.mca_dims = v;
        }
        if let Some(v) = pick(&self.embedding_dim, choice[9]) {
            c.embedding_dim = v;
        }
        if let Some(v) = pick(&self.lstm_width, choice[10]) {
            if let Some(b) = c.sequence_branch.as_mut() {
                b.lstm_width = v;
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    #[default]
    Random,
    /// Grid points in lexicographic order, truncated to the budget.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub space: SearchSpace,
    pub budget: usize,
    #[serde(default)]
    pub strategy: SearchStrategy,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default)]
    pub seed: u64,
    /// Share of the latest training deals used to score trials.
    #[serde(default = "default_fraction")]
    pub validation_fraction: f64,
    /// Worker threads; `None` reads `MERGEPIPE_THREADS`, defaulting to 1.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_fraction() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    pub config: FrameworkConfig,
    pub valid_report: EvalReport,
    pub test_report: Option<EvalReport>,
    pub objective_value: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Best first by objective on the validation rows; ties by trial index.
    pub trials: Vec<TrialResult>,
    /// The winner retrained on all training rows and scored on test once.
    pub winner: RunOutput,
}

fn decode(mut flat: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for (slot, &s) in out.iter_mut().zip(sizes).rev() {
        *slot = flat % s;
        flat /= s;
    }
    out
}

/// Trial configs in index order.
fn trial_configs(base: &FrameworkConfig, search: &SearchConfig) -> Vec<FrameworkConfig> {
    let sizes = search.space.sizes();
    let n = match search.strategy {
        SearchStrategy::Random => search.budget,
        SearchStrategy::Grid => search.budget.min(search.space.grid_size()),
    };
    (0..n)
        .map(|index| {
            let choice = match search.strategy {
                SearchStrategy::Grid => decode(index, &sizes),
                SearchStrategy::Random => {
                    let mut rng = seeded(derive_seed(search.seed, index as u64));
                    sizes.iter().map(|&s| rng.gen_range(0..s)).collect()
                }
            };
            let mut c = search.space.apply(base, &choice);
            c.objective = search.objective;
            c.seed = derive_seed(search.seed ^ 0x5eed, index as u64);
            c
        })
        .collect()
}

fn thread_count(search: &SearchConfig) -> usize {
    search
        .threads
        .or_else(|| std::env::var("MERGEPIPE_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1)
}

/// Evaluates up to `budget` configurations on a temporal holdout carved from
/// `train`, ranks them by the objective on that holdout, then retrains the
/// best on all of `train` and scores it on `test`.
pub fn hyper_search(
    train: &[DealRecord],
    test: &[DealRecord],
    schema: &DatasetSchema,
    base: &FrameworkConfig,
    search: &SearchConfig,
) -> Result<SearchOutcome, PipelineError> {
    if search.budget == 0 {
        return Err(PipelineError::EmptySpace("budget must be at least 1".into()));
    }
    if search.space.sizes().contains(&0) {
        return Err(PipelineError::EmptySpace("a search field has no candidates".into()));
    }
    if !(search.validation_fraction > 0.0 && search.validation_fraction < 1.0) {
        return Err(PipelineError::BadConfig("search validation_fraction must lie in (0, 1)".into()));
    }
    let configs = trial_configs(base, search);
    for c in &configs {
        c.validate()?;
    }
    let (fit_idx, valid_idx) = holdout_split(train, search.validation_fraction);
    if fit_idx.is_empty() || valid_idx.is_empty() {
        return Err(PipelineError::BadConfig("training set too small for a search holdout".into()));
    }
    let search_train: Vec<DealRecord> = fit_idx.iter().map(|&i| train[i].clone()).collect();
    let search_valid: Vec<DealRecord> = valid_idx.iter().map(|&i| train[i].clone()).collect();

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<TrialResult, PipelineError>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    let worker = || loop {
        let index = next.fetch_add(1, Ordering::SeqCst);
        let Some(config) = configs.get(index) else { break };
        let start = Instant::now();
        let result = run_framework(&search_train, &search_valid, schema, config).map(|out| TrialResult {
            index,
            config: config.clone(),
            objective_value: search.objective.value(&out.out_of_sample),
            valid_report: out.out_of_sample,
            test_report: None,
            wall_time: start.elapsed().as_secs_f64(),
        });
        slots.lock().expect("no poisoned workers")[index] = Some(result);
    };
    let threads = thread_count(search).min(configs.len());
    if threads <= 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(worker);
            }
        });
    }
    let mut trials = Vec::with_capacity(configs.len());
    for slot in slots.into_inner().expect("no poisoned workers") {
        trials.push(slot.expect("every trial ran")?);
    }
    trials.sort_by(|a, b| match (a.objective_value, b.objective_value) {
        (Some(x), Some(y)) => y.total_cmp(&x).then(a.index.cmp(&b.index)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.index.cmp(&b.index),
    });
    let winner = run_framework(train, test, schema, &trials[0].config)?;
    trials[0].test_report = Some(winner.out_of_sample.clone());
    Ok(SearchOutcome { trials, winner })
}
