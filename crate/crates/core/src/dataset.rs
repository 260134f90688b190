//! Deal records, CSV I/O, temporal splitting and the synthetic deal generator.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

/// Days in the sentiment window: 90 before announcement, the announcement day, 30 after.
pub const SENTIMENT_LENGTH: usize = 121;
/// Position of the announcement day inside the default sentiment window.
pub const ANNOUNCEMENT_INDEX: usize = 90;

/// Label for a completed deal.
pub const COMPLETED: u8 = 0;
/// Label for a cancelled deal; the positive class everywhere in this crate.
pub const CANCELLED: u8 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header mismatch: {0}")]
    BadHeader(String),
    #[error("MalformedRow: row {row} has {found} columns, expected {expected}")]
    MalformedRow { row: usize, expected: usize, found: usize },
    #[error("row {row}: cannot parse {value:?} in column {column}")]
    BadValue { row: usize, column: String, value: String },
    #[error("UnknownCategory: row {row}: {value:?} is not a level of {column}")]
    UnknownCategory { row: usize, column: String, value: String },
    #[error("BadSentiment: row {row}: {reason}")]
    BadSentiment { row: usize, reason: String },
    #[error("DuplicateId: {0}")]
    DuplicateId(String),
    #[error("row {row}: label must be 0 or 1, got {value:?}")]
    BadLabel { row: usize, value: String },
    #[error("invalid schema: {0}")]
    BadSchema(String),
    #[error("invalid split: {0}")]
    BadSplit(String),
    #[error("EmptySide: temporal split leaves the {0} side empty")]
    EmptySide(&'static str),
    #[error("BadConfig: {0}")]
    BadConfig(String),
}

pub type Result<T, E = DatasetError> = std::result::Result<T, E>;

/// One announced M&A deal.
///
/// Categorical cells hold the level label; binary variables are two-level
/// categoricals. Sentiment is all-or-nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DealRecord {
    pub deal_id: String,
    pub announce_date: NaiveDate,
    pub numeric: Vec<Option<f64>>,
    pub categorical: Vec<Option<String>>,
    pub sentiment: Option<Vec<f64>>,
    pub label: u8,
}

impl DealRecord {
    pub fn is_cancelled(&self) -> bool {
        self.label == CANCELLED
    }

    pub fn has_missing(&self) -> bool {
        self.numeric.iter().any(Option::is_none) || self.categorical.iter().any(Option::is_none)
    }
}

/// Column layout shared by every record in a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub numeric_names: Vec<String>,
    pub categorical_names: Vec<String>,
    pub categorical_levels: Vec<Vec<String>>,
    #[serde(default = "default_sentiment_length")]
    pub sentiment_length: usize,
    /// Index of the announcement day within the sentiment window. Metadata only.
    #[serde(default = "default_announcement_index")]
    pub announcement_index: usize,
}

fn default_sentiment_length() -> usize {
    SENTIMENT_LENGTH
}

fn default_announcement_index() -> usize {
    ANNOUNCEMENT_INDEX
}

impl DatasetSchema {
    pub fn validate(&self) -> Result<()> {
        if self.categorical_names.len() != self.categorical_levels.len() {
            return Err(DatasetError::BadSchema(format!(
                "{} categorical names but {} level lists",
                self.categorical_names.len(),
                self.categorical_levels.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in self.numeric_names.iter().chain(&self.categorical_names) {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::BadSchema(format!("duplicate column name {name:?}")));
            }
            if is_reserved(name) {
                return Err(DatasetError::BadSchema(format!("reserved column name {name:?}")));
            }
        }
        for (name, levels) in self.categorical_names.iter().zip(&self.categorical_levels) {
            if levels.is_empty() {
                return Err(DatasetError::BadSchema(format!("{name} has no levels")));
            }
            let distinct: HashSet<_> = levels.iter().collect();
            if distinct.len() != levels.len() {
                return Err(DatasetError::BadSchema(format!("{name} has repeated levels")));
            }
        }
        if self.sentiment_length > 0 && self.announcement_index >= self.sentiment_length {
            return Err(DatasetError::BadSchema("announcement index outside sentiment window".into()));
        }
        Ok(())
    }

    /// Total one-hot width, `J = sum of level counts`.
    pub fn indicator_width(&self) -> usize {
        self.categorical_levels.iter().map(Vec::len).sum()
    }

    pub fn sentiment_columns(&self) -> Vec<String> {
        (0..self.sentiment_length).map(|t| format!("s{t:03}")).collect()
    }

    /// Full CSV header for this schema.
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["deal_id".to_string(), "announce_date".to_string()];
        h.extend(self.numeric_names.iter().cloned());
        h.extend(self.categorical_names.iter().cloned());
        h.extend(self.sentiment_columns());
        h.push("label".to_string());
        h
    }

    /// Full-size column layout: 52 numeric features, 40 binary
    /// and 11 multi-level categoricals, 108 indicator columns in total.
    pub fn full_scale() -> Self {
        const MULTI_LEVELS: [usize; 11] = [4, 3, 3, 3, 2, 2, 2, 2, 3, 2, 2];
        let numeric_names = (0..52).map(|i| format!("num_{i:02}")).collect();
        let mut categorical_names = Vec::new();
        let mut categorical_levels = Vec::new();
        for i in 0..40 {
            categorical_names.push(format!("bin_{i:02}"));
            categorical_levels.push(vec!["N".to_string(), "Y".to_string()]);
        }
        for (i, &l) in MULTI_LEVELS.iter().enumerate() {
            categorical_names.push(format!("cat_{i:02}"));
            categorical_levels.push((0..l).map(|k| format!("L{k}")).collect());
        }
        DatasetSchema {
            numeric_names,
            categorical_names,
            categorical_levels,
            sentiment_length: SENTIMENT_LENGTH,
            announcement_index: ANNOUNCEMENT_INDEX,
        }
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let schema: Self = serde_json::from_str(&text)
            .map_err(|e| DatasetError::BadSchema(format!("{}: {e}", path.display())))?;
        schema.validate()?;
        Ok(schema)
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "deal_id" | "announce_date" | "label")
        || (name.len() == 4 && name.starts_with('s') && name[1..].bytes().all(|b| b.is_ascii_digit()))
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    Ok(text)
}

/// Checks a record against the schema and the value-range invariants.
pub fn validate_record(record: &DealRecord, schema: &DatasetSchema) -> Result<()> {
    let bad = |reason: String| DatasetError::BadSchema(format!("{}: {reason}", record.deal_id));
    if record.numeric.len() != schema.numeric_names.len() {
        return Err(bad("numeric width".into()));
    }
    if record.categorical.len() != schema.categorical_names.len() {
        return Err(bad("categorical width".into()));
    }
    for ((value, levels), name) in record
        .categorical
        .iter()
        .zip(&schema.categorical_levels)
        .zip(&schema.categorical_names)
    {
        if let Some(v) = value {
            if !levels.contains(v) {
                return Err(DatasetError::UnknownCategory { row: 0, column: name.clone(), value: v.clone() });
            }
        }
    }
    if record.label > 1 {
        return Err(DatasetError::BadLabel { row: 0, value: record.label.to_string() });
    }
    if let Some(s) = &record.sentiment {
        check_sentiment(s, schema.sentiment_length).map_err(|reason| DatasetError::BadSentiment { row: 0, reason })?;
    }
    Ok(())
}

fn check_sentiment(values: &[f64], expected: usize) -> std::result::Result<(), String> {
    if values.len() != expected {
        return Err(format!("length {} != {expected}", values.len()));
    }
    if let Some(v) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
        return Err(format!("value {v} outside [-1, 1]"));
    }
    Ok(())
}

/// Loads deals from CSV. Empty cells are missing values.
///
/// The sentiment block may be absent from the header entirely, in which case
/// every record carries no sentiment.
pub fn load_deals_csv(path: &Path, schema: &DatasetSchema) -> Result<Vec<DealRecord>> {
    let file = File::open(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    read_deals_csv(file, schema)
}

pub fn read_deals_csv<R: Read>(reader: R, schema: &DatasetSchema) -> Result<Vec<DealRecord>> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();

    let full = schema.header();
    let has_sentiment = if header == full {
        schema.sentiment_length > 0
    } else {
        let mut without = full.clone();
        without.retain(|c| !schema.sentiment_columns().contains(c));
        if header == without {
            false
        } else {
            return Err(DatasetError::BadHeader(format!(
                "expected {} columns starting {:?}, found {} columns",
                full.len(),
                &full[..full.len().min(3)],
                header.len()
            )));
        }
    };

    let n_num = schema.numeric_names.len();
    let n_cat = schema.categorical_names.len();
    let n_sent = if has_sentiment { schema.sentiment_length } else { 0 };
    let expected = header.len();

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row?;
        if row.len() != expected {
            return Err(DatasetError::MalformedRow { row: row_no, expected, found: row.len() });
        }
        let deal_id = row[0].to_string();
        if !seen.insert(deal_id.clone()) {
            return Err(DatasetError::DuplicateId(deal_id));
        }
        let announce_date = NaiveDate::parse_from_str(&row[1], "%Y-%m-%d").map_err(|_| DatasetError::BadValue {
            row: row_no,
            column: "announce_date".into(),
            value: row[1].to_string(),
        })?;

        let mut numeric = Vec::with_capacity(n_num);
        for (j, name) in schema.numeric_names.iter().enumerate() {
            let cell = row[2 + j].trim();
            numeric.push(if cell.is_empty() {
                None
            } else {
                Some(cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| DatasetError::BadValue {
                    row: row_no,
                    column: name.clone(),
                    value: cell.to_string(),
                })?)
            });
        }

        let mut categorical = Vec::with_capacity(n_cat);
        for (j, (name, levels)) in schema.categorical_names.iter().zip(&schema.categorical_levels).enumerate() {
            let cell = &row[2 + n_num + j];
            if cell.is_empty() {
                categorical.push(None);
            } else if levels.iter().any(|l| l == cell) {
                categorical.push(Some(cell.to_string()));
            } else {
                return Err(DatasetError::UnknownCategory { row: row_no, column: name.clone(), value: cell.to_string() });
            }
        }

        let start = 2 + n_num + n_cat;
        let cells: Vec<&str> = (start..start + n_sent).map(|c| row.get(c).unwrap_or("")).collect();
        let sentiment = if n_sent == 0 || cells.iter().all(|c| c.is_empty()) {
            None
        } else {
            let mut values = Vec::with_capacity(n_sent);
            for (t, cell) in cells.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| DatasetError::BadSentiment {
                    row: row_no,
                    reason: format!("unparseable value {cell:?} at s{t:03}"),
                })?;
                values.push(v);
            }
            check_sentiment(&values, schema.sentiment_length)
                .map_err(|reason| DatasetError::BadSentiment { row: row_no, reason })?;
            Some(values)
        };

        let label_cell = &row[expected - 1];
        let label = match label_cell {
            "0" => COMPLETED,
            "1" => CANCELLED,
            other => return Err(DatasetError::BadLabel { row: row_no, value: other.to_string() }),
        };

        out.push(DealRecord { deal_id, announce_date, numeric, categorical, sentiment, label });
    }
    Ok(out)
}

/// Writes deals in the layout [`load_deals_csv`] reads.
///
/// The sentiment block is written only when at least one record has sentiment.
pub fn write_deals_csv(path: &Path, deals: &[DealRecord], schema: &DatasetSchema) -> Result<()> {
    let file = File::create(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    write_deals(file, deals, schema)
}

pub fn write_deals<W: Write>(writer: W, deals: &[DealRecord], schema: &DatasetSchema) -> Result<()> {
    let with_sentiment = schema.sentiment_length > 0 && deals.iter().any(|d| d.sentiment.is_some());
    let mut header = schema.header();
    if !with_sentiment {
        let sent = schema.sentiment_columns();
        header.retain(|c| !sent.contains(c));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for d in deals {
        row.clear();
        row.push(d.deal_id.clone());
        row.push(d.announce_date.format("%Y-%m-%d").to_string());
        row.extend(d.numeric.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
        row.extend(d.categorical.iter().map(|v| v.clone().unwrap_or_default()));
        if with_sentiment {
            match &d.sentiment {
                Some(s) => row.extend(s.iter().map(f64::to_string)),
                None => row.extend(std::iter::repeat(String::new()).take(schema.sentiment_length)),
            }
        }
        row.push(d.label.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| DatasetError::Io { path: PathBuf::from("<writer>"), source })?;
    Ok(())
}

/// How to divide deals into a training and a test part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    #[serde(default)]
    pub cutoff_date: Option<NaiveDate>,
    #[serde(default)]
    pub train_fraction_override: Option<f64>,
}

impl SplitSpec {
    pub fn at_date(cutoff: NaiveDate) -> Self {
        SplitSpec { cutoff_date: Some(cutoff), train_fraction_override: None }
    }

    pub fn by_fraction(fraction: f64) -> Self {
        SplitSpec { cutoff_date: None, train_fraction_override: Some(fraction) }
    }

    /// Deals announced before 2019 train, the rest test.
    pub fn pre_2019() -> Self {
        Self::at_date(NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date"))
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self::pre_2019()
    }
}

/// Splits deals into (train, test) by announcement date.
///
/// With a cutoff date, train holds records strictly before it. With a
/// fraction, train holds the earliest `floor(fraction * n)` records (ties on
/// date resolved by input order). Input order is preserved on both sides.
pub fn temporal_split(deals: &[DealRecord], spec: &SplitSpec) -> Result<(Vec<DealRecord>, Vec<DealRecord>)> {
    let mask = train_mask(deals, spec)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (d, in_train) in deals.iter().zip(mask) {
        if in_train {
            train.push(d.clone());
        } else {
            test.push(d.clone());
        }
    }
    if train.is_empty() {
        return Err(DatasetError::EmptySide("train"));
    }
    if test.is_empty() {
        return Err(DatasetError::EmptySide("test"));
    }
    Ok((train, test))
}

fn train_mask(deals: &[DealRecord], spec: &SplitSpec) -> Result<Vec<bool>> {
    match (spec.cutoff_date, spec.train_fraction_override) {
        (Some(cutoff), None) => Ok(deals.iter().map(|d| d.announce_date < cutoff).collect()),
        (None, Some(fraction)) => {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(DatasetError::BadSplit(format!("train fraction {fraction} not in (0, 1)")));
            }
            let n_train = (fraction * deals.len() as f64).floor() as usize;
            let mut order: Vec<usize> = (0..deals.len()).collect();
            order.sort_by_key(|&i| (deals[i].announce_date, i));
            let mut mask = vec![false; deals.len()];
            for &i in &order[..n_train] {
                mask[i] = true;
            }
            Ok(mask)
        }
        _ => Err(DatasetError::BadSplit("exactly one of cutoff_date / train_fraction_override must be set".into())),
    }
}

/// Settings for [`generate_synthetic`]. Fields missing from JSON take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_deals: usize,
    pub cancel_rate: f64,
    pub n_numeric: usize,
    pub n_categorical: usize,
    pub sentiment_length: usize,
    pub missing_rate: f64,
    pub signal_strength: f64,
    /// Strength of the label-dependent post-announcement sentiment drift.
    /// Defaults to `signal_strength`.
    #[serde(default)]
    pub sentiment_signal: Option<f64>,
    /// Level count per categorical variable. Defaults to cycling 2, 3, 4.
    #[serde(default)]
    pub categorical_levels: Option<Vec<usize>>,
    /// Number of latent factors driving the numeric block. Defaults to `max(1, n_numeric / 4)`.
    #[serde(default)]
    pub latent_rank: Option<usize>,
    #[serde(default = "default_start")]
    pub start_date: NaiveDate,
    #[serde(default = "default_cutoff")]
    pub cutoff_date: NaiveDate,
    #[serde(default = "default_end")]
    pub end_date: NaiveDate,
    /// Deals dated before `cutoff_date`. Defaults to a 16,525 / 17,440 proportion.
    #[serde(default)]
    pub train_count: Option<usize>,
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2001, 1, 1).expect("valid date")
}
fn default_cutoff() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date")
}
fn default_end() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 10, 30).expect("valid date")
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_deals: 2000,
            cancel_rate: 0.2,
            n_numeric: 12,
            n_categorical: 6,
            sentiment_length: SENTIMENT_LENGTH,
            missing_rate: 0.1,
            signal_strength: 1.0,
            sentiment_signal: None,
            categorical_levels: None,
            latent_rank: None,
            start_date: default_start(),
            cutoff_date: default_cutoff(),
            end_date: default_end(),
            train_count: None,
        }
    }
}

impl GeneratorConfig {
    /// Full universe size and layout: 17,440 deals, 16,525 before 2019.
    pub fn full_scale() -> Self {
        let schema = DatasetSchema::full_scale();
        GeneratorConfig {
            n_deals: 17_440,
            cancel_rate: 0.1984,
            n_numeric: 52,
            n_categorical: schema.categorical_names.len(),
            categorical_levels: Some(schema.categorical_levels.iter().map(Vec::len).collect()),
            train_count: Some(16_525),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DatasetError::BadConfig(m));
        if self.n_deals == 0 {
            return bad("n_deals must be positive".into());
        }
        if !(self.cancel_rate > 0.0 && self.cancel_rate < 1.0) {
            return bad(format!("cancel_rate {} not in (0, 1)", self.cancel_rate));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return bad(format!("missing_rate {} not in [0, 1)", self.missing_rate));
        }
        if !(self.signal_strength >= 0.0 && self.signal_strength.is_finite()) {
            return bad(format!("signal_strength {} must be >= 0", self.signal_strength));
        }
        if let Some(s) = self.sentiment_signal {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("sentiment_signal {s} must be >= 0"));
            }
        }
        if let Some(levels) = &self.categorical_levels {
            if levels.len() != self.n_categorical {
                return bad(format!("{} level counts for {} categoricals", levels.len(), self.n_categorical));
            }
            if levels.iter().any(|&l| l < 2) {
                return bad("every categorical needs at least 2 levels".into());
            }
        }
        if let Some(r) = self.latent_rank {
            if r == 0 || r > self.n_numeric.max(1) {
                return bad(format!("latent_rank {r} not in 1..={}", self.n_numeric));
            }
        }
        if !(self.start_date < self.cutoff_date && self.cutoff_date <= self.end_date) {
            return bad("dates must satisfy start < cutoff <= end".into());
        }
        if let Some(t) = self.train_count {
            if t > self.n_deals {
                return bad(format!("train_count {t} exceeds n_deals {}", self.n_deals));
            }
        }
        if self.sentiment_length > 0 && self.sentiment_length <= ANNOUNCEMENT_INDEX {
            return bad(format!("sentiment_length must be 0 or greater than {ANNOUNCEMENT_INDEX}"));
        }
        Ok(())
    }

    fn levels(&self) -> Vec<usize> {
        self.categorical_levels
            .clone()
            .unwrap_or_else(|| (0..self.n_categorical).map(|i| 2 + i % 3).collect())
    }

    /// Schema describing the generator's output.
    pub fn schema(&self) -> DatasetSchema {
        DatasetSchema {
            numeric_names: (0..self.n_numeric).map(|i| format!("num_{i:02}")).collect(),
            categorical_names: (0..self.n_categorical).map(|i| format!("cat_{i:02}")).collect(),
            categorical_levels: self.levels().iter().map(|&l| (0..l).map(|k| format!("L{k}")).collect()).collect(),
            sentiment_length: self.sentiment_length,
            announcement_index: ANNOUNCEMENT_INDEX,
        }
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| DatasetError::BadConfig(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

const AR_COEF: f64 = 0.95;
const AR_NOISE: f64 = 0.1;
const DRIFT_PER_DAY: f64 = 0.02;
const NOISE_SCALE: f64 = 0.5;

/// Draws a synthetic deal universe with a known label-dependent structure.
///
/// Numeric features follow a latent factor model plus a label-dependent mean
/// shift of size `signal_strength` along a fixed unit direction, then get
/// per-column scales spanning three orders of magnitude. Categoricals follow
/// label-tilted multinomials. Sentiment is `tanh` of an AR(1) path whose drift
/// after the announcement day is positive for completed deals and negative
/// for cancelled ones. Deals are dated in index order; the first
/// `train_count` fall before `cutoff_date`.
///
/// A row whose numeric cells would all be blanked keeps one cell, so every
/// row stays comparable for nearest-neighbour imputation.
pub fn generate_synthetic(config: &GeneratorConfig, seed: u64) -> Result<Vec<DealRecord>> {
    config.validate()?;
    let mut rng = rng::seeded(seed);
    let m = config.n_numeric;
    let rank = config.latent_rank.unwrap_or((m / 4).max(1)).max(1);
    let levels = config.levels();
    let schema = config.schema();
    let sentiment_signal = config.sentiment_signal.unwrap_or(config.signal_strength);

    let normal = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };

    // Global structure.
    let loadings: Vec<Vec<f64>> =
        (0..m).map(|_| (0..rank).map(|_| normal(&mut rng) / (rank as f64).sqrt()).collect()).collect();
    let mut direction: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    direction.iter_mut().for_each(|x| *x /= norm);
    let column_scale: Vec<f64> = (0..m).map(|_| 10f64.powf(rng.gen_range(-1.0..2.0))).collect();
    let column_offset: Vec<f64> = (0..m).map(|_| normal(&mut rng) * 2.0).collect();
    let cat_base: Vec<Vec<f64>> = levels.iter().map(|&l| (0..l).map(|_| normal(&mut rng) * 0.5).collect()).collect();
    let cat_tilt: Vec<Vec<f64>> = levels.iter().map(|&l| (0..l).map(|_| normal(&mut rng)).collect()).collect();

    let train_count = config
        .train_count
        .unwrap_or_else(|| ((config.n_deals as f64) * 16_525.0 / 17_440.0).round() as usize)
        .min(config.n_deals);
    let before_days = (config.cutoff_date - config.start_date).num_days();
    let after_days = (config.end_date - config.cutoff_date).num_days();

    let mut deals = Vec::with_capacity(config.n_deals);
    for i in 0..config.n_deals {
        let label = if rng.gen::<f64>() < config.cancel_rate { CANCELLED } else { COMPLETED };
        let y = f64::from(label);

        let latent: Vec<f64> = (0..rank).map(|_| normal(&mut rng)).collect();
        let mut numeric: Vec<Option<f64>> = (0..m)
            .map(|j| {
                let factor: f64 = loadings[j].iter().zip(&latent).map(|(a, b)| a * b).sum();
                let raw = factor + NOISE_SCALE * normal(&mut rng) + y * config.signal_strength * direction[j];
                Some(column_offset[j] * column_scale[j] + raw * column_scale[j])
            })
            .collect();

        let mut categorical: Vec<Option<String>> = Vec::with_capacity(levels.len());
        for (v, names) in schema.categorical_levels.iter().enumerate() {
            let logits: Vec<f64> = cat_base[v]
                .iter()
                .zip(&cat_tilt[v])
                .map(|(b, t)| b + y * config.signal_strength * 0.5 * t)
                .collect();
            let k = sample_softmax(&logits, rng.gen::<f64>());
            categorical.push(Some(names[k].clone()));
        }

        let sentiment = (config.sentiment_length > 0).then(|| {
            let drift = sentiment_signal * if label == CANCELLED { -DRIFT_PER_DAY } else { DRIFT_PER_DAY };
            let mut a = normal(&mut rng) * AR_NOISE / (1.0 - AR_COEF * AR_COEF).sqrt();
            (0..config.sentiment_length)
                .map(|t| {
                    if t > 0 {
                        a = AR_COEF * a + AR_NOISE * normal(&mut rng);
                        if t > ANNOUNCEMENT_INDEX {
                            a += drift;
                        }
                    }
                    a.tanh()
                })
                .collect::<Vec<f64>>()
        });

        if config.missing_rate > 0.0 {
            for cell in numeric.iter_mut() {
                if rng.gen::<f64>() < config.missing_rate {
                    *cell = None;
                }
            }
            if m > 0 && numeric.iter().all(Option::is_none) {
                let keep = rng.gen_range(0..m);
                let factor: f64 = loadings[keep].iter().zip(&latent).map(|(a, b)| a * b).sum();
                numeric[keep] = Some((column_offset[keep] + factor) * column_scale[keep]);
            }
            for cell in categorical.iter_mut() {
                if rng.gen::<f64>() < config.missing_rate {
                    *cell = None;
                }
            }
        }

        let announce_date = if i < train_count {
            config.start_date + Duration::days(spread(i, train_count, before_days))
        } else {
            config.cutoff_date + Duration::days(spread(i - train_count, config.n_deals - train_count, after_days + 1))
        };

        deals.push(DealRecord {
            deal_id: format!("D{i:06}"),
            announce_date,
            numeric,
            categorical,
            sentiment,
            label,
        });
    }
    Ok(deals)
}

fn spread(i: usize, count: usize, span_days: i64) -> i64 {
    if count == 0 {
        return 0;
    }
    ((i as i128 * span_days as i128) / count as i128) as i64
}

fn sample_softmax(logits: &[f64], u: f64) -> usize {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w / total;
        if u < acc {
            return k;
        }
    }
    logits.len() - 1
}
