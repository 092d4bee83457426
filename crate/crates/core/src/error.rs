use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("payload length mismatch: expected {expected} bytes, found {found}")]
    PayloadLength { expected: usize, found: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("row {row:?}: unknown level {label:?} for factor {factor:?}")]
    UnknownLevel {
        row: String,
        factor: String,
        label: String,
    },

    #[error("ragged row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("id sets differ; first offending id {0:?}")]
    IdMismatch(String),

    #[error("degenerate (near-zero norm) row {0:?}")]
    DegenerateRow(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("class {0} absent from training labels")]
    ClassAbsent(usize),

    #[error("non-finite loss at epoch {epoch}; learning rate too large?")]
    Diverged { epoch: usize },

    #[error("singular normal equations; use ridge > 0")]
    Singular,

    #[error("factor {factor:?} level {level:?} has {count} samples, need at least {needed}")]
    StarvedLevel {
        factor: String,
        level: String,
        count: usize,
        needed: usize,
    },

    #[error("split left a class absent from training after {attempts} reseeds")]
    SplitExhausted { attempts: usize },

    #[error("all-zero matrix")]
    ZeroMatrix,

    #[error("compositional split violated: {0}")]
    SplitOverlap(String),

    #[error("missing column or key {0:?}")]
    MissingKey(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
