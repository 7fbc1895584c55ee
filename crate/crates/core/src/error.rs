use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The integrated state stopped being finite.
    #[error("integration diverged at step {step}: {reason}")]
    Divergence { step: usize, reason: String },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("corrupt dataset file {}: {detail}", file.display())]
    Corruption { file: PathBuf, detail: String },

    #[error("corrupt dataset file {}: truncated at byte offset {offset} (expected {expected} bytes)", file.display())]
    Truncated {
        file: PathBuf,
        offset: u64,
        expected: u64,
    },

    #[error("unsupported dataset format: {0}")]
    UnsupportedFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("manifest parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for the corruption family (bad checksum, truncated or oversized files).
    pub fn is_corruption(&self) -> bool {
        matches!(self, Error::Corruption { .. } | Error::Truncated { .. })
    }
}
