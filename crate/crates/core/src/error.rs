use thiserror::Error;

use crate::model::FailureMode;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown failure mode code {0:?}")]
    UnknownCode(String),
    #[error("hallucinated verdict needs distinct primary and secondary codes, got {0} twice")]
    SameCodes(FailureMode),
    #[error("malformed verdict: {0}")]
    MalformedVerdict(String),
    #[error("verdict JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("vocabulary corpus is empty")]
    EmptyCorpus,
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("resolution bundle belongs to citation {bundle:?}, not {citation:?}")]
    BundleMismatch { citation: String, bundle: String },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io error reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("fixture file: {0}")]
    Fixture(#[from] serde_json::Error),
    #[error("invalid provider config {name:?}: {reason}")]
    InvalidProvider { name: String, reason: String },
    #[error(transparent)]
    Thresholds(#[from] MatchError),
}

/// One row-addressed problem found while loading a coded corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    /// 1-based line number in the CSV file (header is line 1).
    pub line: u64,
    pub column: Option<String>,
    pub message: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.column {
            Some(col) => write!(f, "line {}, column {}: {}", self.line, col, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus header must be `paper_id,citation_text,primary,secondary,notes`, found `{0}`")]
    BadHeader(String),
    #[error("{} malformed row(s); first: {}", .0.len(), .0[0])]
    Rows(Vec<RowError>),
    #[error("cannot summarize an empty corpus")]
    Empty,
    #[error("summary JSON: {0}")]
    Json(#[from] serde_json::Error),
}
