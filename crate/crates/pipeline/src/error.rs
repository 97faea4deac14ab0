use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;
use xamr::penman::ParseError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid adapter configuration: {0}")]
    InvalidSpec(String),
    #[error("batch {batch}: cannot start `{command}`: {source}")]
    Spawn {
        batch: usize,
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("batch {batch}: adapter exited with {status}: {stderr}")]
    Failed {
        batch: usize,
        status: String,
        stderr: String,
    },
    #[error("batch {batch}: adapter timed out after {timeout:?}")]
    Timeout { batch: usize, timeout: Duration },
    #[error("batch {batch}: sent {expected} items but adapter returned {found}")]
    CountMismatch {
        batch: usize,
        expected: usize,
        found: usize,
    },
    #[error("batch {batch}: HTTP adapter error: {message}")]
    Http { batch: usize, message: String },
    #[error("block {index} (batch {batch}): {source}")]
    Parse {
        batch: usize,
        index: usize,
        #[source]
        source: ParseError,
    },
    #[error("corrupt cache entry {path}: {reason}")]
    CacheCorrupt { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
