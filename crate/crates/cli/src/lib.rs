//! Batch pipeline around `pyrocast-core`: file-based ingestion of fire,
//! weather, and vegetation-index extracts, the fusion/featurize/train/
//! evaluate stage chain, a documented synthetic benchmark generator, and the
//! file formats everything is exchanged through.

pub mod config;
pub mod formats;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod synth;

use std::path::PathBuf;

/// Pipeline failure classes, mapped onto process exit codes: validation and
/// leakage problems exit 1, I/O and schema problems exit 2.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Validation(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Schema(_) | PipelineError::Io { .. } => 2,
            PipelineError::Validation(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> PipelineError {
        let path = path.into();
        move |source| PipelineError::Io { path, source }
    }
}

impl From<pyrocast_core::Error> for PipelineError {
    fn from(e: pyrocast_core::Error) -> Self {
        PipelineError::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
