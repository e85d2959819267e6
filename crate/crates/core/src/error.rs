// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index is empty")]
    EmptyIndex,

    #[error("token not found: {0}")]
    TokenNotFound(String),

    #[error("conflicting frequencies for token {token} in document {doc}: {first} vs {second}")]
    ConflictingPosting {
        token: String,
        doc: String,
        first: u32,
        second: u32,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("matrix label mismatch: {0}")]
    LabelMismatch(String),

    #[error("invalid k: {0}")]
    InvalidK(String),

    #[error("center set is empty")]
    EmptyCenters,

    #[error("embedding dimension mismatch for {word}: expected {expected}, found {found}")]
    DimensionMismatch {
        word: String,
        expected: usize,
        found: usize,
    },

    #[error("reports cover different corpora: {0} vs {1}")]
    CorpusMismatch(String, String),

    #[error("config: {0}")]
    Config(String),

    #[error("key: {0}")]
    Key(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyIndex => "empty-index",
            Error::TokenNotFound(_) => "not-found",
            Error::ConflictingPosting { .. } => "conflicting-posting",
            Error::InvalidInput(_) => "invalid-input",
            Error::Parse { .. } => "parse",
            Error::LabelMismatch(_) => "label-mismatch",
            Error::InvalidK(_) => "invalid-k",
            Error::EmptyCenters => "empty-centers",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::CorpusMismatch(..) => "corpus-mismatch",
            Error::Config(_) => "config",
            Error::Key(_) => "key",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn parse(path: &str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }
}
