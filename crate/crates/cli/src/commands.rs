use std::path::{Path, PathBuf};
use std::time::Instant;

use mergepipe_core::dataset::{generate_synthetic, load_deals_csv, temporal_split, write_deals_csv, DatasetSchema, DealRecord, GeneratorConfig, SplitSpec};
use mergepipe_core::pipeline::{
    fit_logit, hyper_search, run_framework, Framework, FrameworkConfig, Objective, RunOutput, SearchConfig, SearchOutcome,
    SearchSpace, SearchStrategy, SequenceBranch, TrialResult,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::artifacts::{manifest, read_bytes, sha256_hex, Metrics, Report, Writer, REPORT_VERSION};
use crate::error::CliError;
use crate::{Baseline, GenerateArgs, RunArgs, SearchArgs};

/// Run-config file: a framework config plus the train/test split.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunFile {
    #[serde(flatten)]
    config: FrameworkConfig,
    #[serde(default)]
    split: SplitSpec,
}

fn parse_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn canonical<T: Serialize>(value: &T) -> String {
    sha256_hex(serde_json::to_string(value).expect("config serializes").as_bytes())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let config = match &args.config {
        Some(path) => GeneratorConfig::read_json(path)?,
        None => GeneratorConfig::default(),
    };
    let deals = generate_synthetic(&config, args.seed)?;
    let dir = args.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut out = Writer::new(dir, start)?;
    write_deals_csv(&args.out, &deals, &config.schema())?;
    out.record(&file_name(&args.out));
    let schema_path = sibling(&args.out, ".schema.json");
    out.json(&file_name(&schema_path), &config.schema())?;
    let data_digest = sha256_hex(&read_bytes(&args.out)?);
    let m = manifest("generate", canonical(&config), Some(data_digest), args.seed);
    out.finish(&file_name(&sibling(&args.out, ".manifest.json")), m)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

struct Loaded {
    train: Vec<DealRecord>,
    test: Vec<DealRecord>,
    schema: DatasetSchema,
    data_digest: String,
}

fn load(data: &Path, schema: Option<&Path>, split: &SplitSpec) -> Result<Loaded, CliError> {
    let schema_path = schema.map(Path::to_path_buf).unwrap_or_else(|| sibling(data, ".schema.json"));
    let schema = DatasetSchema::read_json(&schema_path)?;
    let deals = load_deals_csv(data, &schema)?;
    let data_digest = sha256_hex(&read_bytes(data)?);
    let (train, test) = temporal_split(&deals, split)?;
    Ok(Loaded { train, test, schema, data_digest })
}

fn run_file(path: Option<&Path>) -> Result<RunFile, CliError> {
    match path {
        Some(p) => parse_json(p),
        None => Ok(RunFile { config: FrameworkConfig::default(), split: SplitSpec::default() }),
    }
}

fn with_branch(mut config: FrameworkConfig) -> FrameworkConfig {
    if config.framework == Framework::F3 && config.sequence_branch.is_none() {
        config.sequence_branch = Some(SequenceBranch::default());
    }
    config
}

fn report(out: &RunOutput, model: &str, data: &Loaded) -> Report {
    Report {
        report_version: REPORT_VERSION,
        model: model.to_string(),
        input_width: out.bundle.input_width(),
        n_train: data.train.len(),
        n_test: data.test.len(),
        out_of_sample: Metrics::from(&out.out_of_sample),
        in_sample: Metrics::from(&out.in_sample),
    }
}

fn write_run(out: &mut Writer, run: &RunOutput, data: &Loaded) -> Result<(), CliError> {
    out.json("report.json", &report(run, run.bundle.kind.name(), data))?;
    out.curve("roc.csv", ("fpr", "tpr"), &run.out_of_sample.roc_points)?;
    out.curve("pr.csv", ("recall", "precision"), &run.out_of_sample.pr_points)?;
    out.json("model.json", &run.bundle)
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut file = run_file(args.config.as_deref())?;
    if let Some(f) = args.framework {
        file.config.framework = f.into();
    }
    if let Some(seed) = args.seed {
        file.config.seed = seed;
    }
    file.config = with_branch(file.config);
    file.config.validate()?;
    let data = load(&args.data, args.schema.as_deref(), &file.split)?;
    let model = match args.baseline {
        None => "framework",
        Some(Baseline::Logit) => "logit",
        Some(Baseline::WeightedLogit) => "weighted-logit",
    };
    let result = match args.baseline {
        None => run_framework(&data.train, &data.test, &data.schema, &file.config)?,
        Some(b) => fit_logit(&data.train, &data.test, &data.schema, &file.config, b == Baseline::WeightedLogit)?,
    };
    let mut out = Writer::new(&args.out_dir, start)?;
    write_run(&mut out, &result, &data)?;
    let digest = canonical(&(model, &file.config, &file.split));
    let m = manifest("run", digest, Some(data.data_digest.clone()), file.config.seed);
    out.finish("manifest.json", m)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn layers(c: &FrameworkConfig) -> String {
    c.network
        .layers
        .iter()
        .map(|l| {
            let act = serde_json::to_value(l.activation).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            format!("{}:{act}", l.width)
        })
        .collect::<Vec<_>>()
        .join("|")
}

const TRIAL_COLUMNS: [&str; 20] = [
    "rank", "trial", "objective", "accuracy", "precision", "recall", "f1", "auroc", "aupr", "layers", "loss",
    "learning_rate", "batch_size", "epochs", "use_smote", "smote_target_ratio", "pca_dims", "mca_dims", "embedding_dim",
    "lstm_width",
];

fn trial_row(rank: usize, t: &TrialResult) -> Vec<String> {
    let c = &t.config;
    let r = &t.valid_report;
    vec![
        (rank + 1).to_string(),
        t.index.to_string(),
        opt(t.objective_value),
        r.accuracy.to_string(),
        opt(r.precision),
        opt(r.recall),
        opt(r.f1),
        opt(r.auroc),
        opt(r.aupr),
        layers(c),
        c.network.loss.name().to_string(),
        c.train.learning_rate.to_string(),
        c.train.batch_size.to_string(),
        c.train.epochs.to_string(),
        c.use_smote.to_string(),
        c.smote.target_ratio.to_string(),
        c.pca_dims.to_string(),
        c.mca_dims.to_string(),
        c.embedding_dim.to_string(),
        c.sequence_branch.as_ref().map(|b| b.lstm_width.to_string()).unwrap_or_default(),
    ]
}

fn trials_csv(outcome: &SearchOutcome) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| CliError::Config(e.to_string());
    w.write_record(TRIAL_COLUMNS).map_err(to_err)?;
    for (rank, t) in outcome.trials.iter().enumerate() {
        w.write_record(trial_row(rank, t)).map_err(to_err)?;
    }
    w.into_inner().map_err(|e| CliError::Config(e.to_string()))
}

pub fn search(args: &SearchArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut file = run_file(args.config.as_deref())?;
    if let Some(f) = args.framework {
        file.config.framework = f.into();
    }
    file.config = with_branch(file.config);
    let space: SearchSpace = parse_json(&args.space)?;
    let search = SearchConfig {
        space,
        budget: args.budget,
        strategy: args.strategy.into(),
        objective: args.objective.into(),
        seed: args.seed,
        validation_fraction: args.validation_fraction,
        threads: None,
    };
    if search.budget == 0 || search.space.grid_size() == 0 {
        return Err(mergepipe_core::pipeline::PipelineError::EmptySpace("nothing to evaluate".into()).into());
    }
    file.config.validate()?;
    let data = load(&args.data, args.schema.as_deref(), &file.split)?;
    let outcome = hyper_search(&data.train, &data.test, &data.schema, &file.config, &search)?;
    let mut out = Writer::new(&args.out_dir, start)?;
    out.bytes("trials.csv", &trials_csv(&outcome)?)?;
    write_run(&mut out, &outcome.winner, &data)?;
    let digest = canonical(&(&file.config, &file.split, &search));
    let m = manifest("search", digest, Some(data.data_digest.clone()), args.seed);
    out.finish("manifest.json", m)
}

impl From<crate::FrameworkArg> for Framework {
    fn from(f: crate::FrameworkArg) -> Self {
        match f {
            crate::FrameworkArg::F1 => Framework::F1,
            crate::FrameworkArg::F2 => Framework::F2,
            crate::FrameworkArg::F3 => Framework::F3,
        }
    }
}

impl From<crate::ObjectiveArg> for Objective {
    fn from(o: crate::ObjectiveArg) -> Self {
        match o {
            crate::ObjectiveArg::Recall => Objective::Recall,
            crate::ObjectiveArg::Accuracy => Objective::Accuracy,
            crate::ObjectiveArg::F1 => Objective::F1,
        }
    }
}

impl From<crate::StrategyArg> for SearchStrategy {
    fn from(s: crate::StrategyArg) -> Self {
        match s {
            crate::StrategyArg::Random => SearchStrategy::Random,
            crate::StrategyArg::Grid => SearchStrategy::Grid,
        }
    }
}
