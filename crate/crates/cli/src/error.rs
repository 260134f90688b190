use std::path::PathBuf;

use mergepipe_core::dataset::DatasetError;
use mergepipe_core::pipeline::PipelineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Pipeline(#[from] PipelineError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Pipeline(e) if e.is_config() => 2,
            CliError::Pipeline(_) => 3,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { path, source } => CliError::Io { path, source },
            DatasetError::BadConfig(m) | DatasetError::BadSchema(m) | DatasetError::BadSplit(m) => CliError::Config(m),
            other => CliError::Pipeline(PipelineError::Dataset(other)),
        }
    }
}
