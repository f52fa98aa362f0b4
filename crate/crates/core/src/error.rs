use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("taxon error: {0}")]
    Taxon(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("structural violation: {0}")]
    StructuralViolation(String),

    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionBudgetExceeded { attempts: u64 },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error on line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable code, one per variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "PARSE",
            Error::MalformedTree(_) => "MALFORMED_TREE",
            Error::Taxon(_) => "TAXON",
            Error::EmptyInput(_) => "EMPTY_INPUT",
            Error::DegenerateModel(_) => "DEGENERATE_MODEL",
            Error::StructuralViolation(_) => "STRUCTURAL_VIOLATION",
            Error::RejectionBudgetExceeded { .. } => "REJECTION_BUDGET",
            Error::Manifest(_) => "MANIFEST",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::Format { .. } => "FORMAT",
            Error::Io { .. } => "IO",
        }
    }

    /// Process exit code for the command line tool. Zero is never returned.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Parse { .. } => 10,
            Error::MalformedTree(_) => 11,
            Error::Taxon(_) => 12,
            Error::EmptyInput(_) => 13,
            Error::DegenerateModel(_) => 14,
            Error::StructuralViolation(_) => 15,
            Error::RejectionBudgetExceeded { .. } => 16,
            Error::Manifest(_) => 17,
            Error::InvalidArgument(_) => 2,
            Error::Format { .. } => 18,
            Error::Io { .. } => 19,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
