//! Crate-wide error type.

use std::path::PathBuf;

/// Errors surfaced by the pipeline stages.
///
/// Variant names are stable: the CLI prints them verbatim in diagnostics
/// (`error[TooShort]: ...`) so scripts can branch on them.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // --- ingest ---
    #[error("condition directory {0:?} not found under {1:?}")]
    MissingConditionDir(String, PathBuf),
    #[error("condition directory {0:?} contains no files")]
    EmptyConditionDir(PathBuf),
    #[error("malformed CSV in {path:?}: {reason}")]
    MalformedCsv { path: PathBuf, reason: String },
    #[error("record {0:?} has fewer than 2 usable samples")]
    TooShort(PathBuf),

    // --- spectrum ---
    #[error("signal contains a non-finite value at index {0}")]
    NonFiniteInput(usize),

    // --- features ---
    #[error("feature matrix is empty")]
    EmptyMatrix,
    #[error("all {0} feature rows contained non-finite values")]
    AllRowsDropped(usize),

    // --- classifiers ---
    #[error("training data contains a single class")]
    SingleClass,
    #[error("k = {k} exceeds the number of training rows ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("query has {got} features but the model was trained on {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation requires a {expected} model, got {got}")]
    WrongModelKind {
        expected: &'static str,
        got: &'static str,
    },
    #[error("model file {path:?} is invalid: {reason}")]
    MalformedModel { path: PathBuf, reason: String },
    #[error("invalid classifier parameter: {0}")]
    InvalidParameter(String),

    // --- eval ---
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("class {label} has {count} rows, fewer than the {k} folds")]
    ClassBelowFoldCount {
        label: String,
        count: usize,
        k: usize,
    },
    #[error("parameter grid is empty")]
    EmptyGrid,

    // --- synth ---
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),

    #[error("unknown condition label {0:?}")]
    UnknownLabel(String),
    #[error("malformed manifest: {0}")]
    MalformedManifest(String),
    #[error("{path:?}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MissingConditionDir(..) => "MissingConditionDir",
            Error::EmptyConditionDir(..) => "EmptyConditionDir",
            Error::MalformedCsv { .. } => "MalformedCsv",
            Error::TooShort(..) => "TooShort",
            Error::NonFiniteInput(..) => "NonFiniteInput",
            Error::EmptyMatrix => "EmptyMatrix",
            Error::AllRowsDropped(..) => "AllRowsDropped",
            Error::SingleClass => "SingleClass",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::WrongModelKind { .. } => "WrongModelKind",
            Error::MalformedModel { .. } => "MalformedModel",
            Error::InvalidParameter(..) => "InvalidParameter",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::ClassBelowFoldCount { .. } => "ClassBelowFoldCount",
            Error::EmptyGrid => "EmptyGrid",
            Error::InvalidConfig(..) => "InvalidConfig",
            Error::UnknownLabel(..) => "UnknownLabel",
            Error::MalformedManifest(..) => "MalformedManifest",
            Error::Io { .. } => "Io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
