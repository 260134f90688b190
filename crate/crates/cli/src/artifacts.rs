//! Report, manifest and curve files written by every command.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mergepipe_core::metrics::{write_curve_csv, ConfusionMatrix, EvalReport};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const REPORT_VERSION: u32 = 1;
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub auroc: Option<f64>,
    pub aupr: Option<f64>,
}

impl From<&EvalReport> for Metrics {
    fn from(r: &EvalReport) -> Self {
        Metrics {
            n: r.n,
            threshold: r.threshold,
            confusion: r.confusion.clone(),
            accuracy: r.accuracy,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            auroc: r.auroc,
            aupr: r.aupr,
        }
    }
}

/// `report.json`: out-of-sample metrics at the top level, in-sample nested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_version: u32,
    pub model: String,
    pub input_width: usize,
    pub n_train: usize,
    pub n_test: usize,
    #[serde(flatten)]
    pub out_of_sample: Metrics,
    pub in_sample: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool_version: String,
    pub command: String,
    pub config_digest: String,
    pub data_digest: Option<String>,
    pub seed: u64,
    pub artifacts: Vec<String>,
    pub wall_time_secs: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(CliError::io(path))
}

/// Collects artifacts under one directory and records their names.
pub struct Writer {
    dir: PathBuf,
    written: Vec<String>,
    start: Instant,
}

impl Writer {
    pub fn new(dir: &Path, start: Instant) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(Writer { dir: dir.to_path_buf(), written: Vec::new(), start })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, data).map_err(CliError::io(&path))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn curve(&mut self, name: &str, columns: (&str, &str), points: &[(f64, f64)]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, columns, points).map_err(CliError::io(self.path(name)))?;
        self.bytes(name, &buf)
    }

    /// Records a file written by other code.
    pub fn record(&mut self, name: &str) {
        self.written.push(name.to_string());
    }

    pub fn finish(mut self, manifest_name: &str, mut manifest: Manifest) -> Result<(), CliError> {
        manifest.wall_time_secs = self.start.elapsed().as_secs_f64();
        manifest.artifacts = self.written.clone();
        manifest.artifacts.push(manifest_name.to_string());
        self.json(manifest_name, &manifest)
    }
}

pub fn manifest(command: &str, config_digest: String, data_digest: Option<String>, seed: u64) -> Manifest {
    Manifest {
        manifest_version: MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config_digest,
        data_digest,
        seed,
        artifacts: Vec::new(),
        wall_time_secs: 0.0,
    }
}
