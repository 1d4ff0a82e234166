use thiserror::Error;

/// Errors raised anywhere in the basemap / overlay pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("line {line}: duplicate category name {name:?} (already used by id {existing})")]
    DuplicateName {
        line: usize,
        name: String,
        existing: usize,
    },

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not square: {0}")]
    NonSquare(String),

    #[error("unresolved category names: {}", .0.join(", "))]
    Unresolved(Vec<String>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no data rows")]
    NoDataRows,

    #[error("no input category could be matched against the registry")]
    AllUnmatched,

    #[error("citation matrix has no nonzero entries")]
    ZeroMatrix,

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("world counts are zero for categories with documents: {}", .0.join(", "))]
    MissingWorldCounts(Vec<String>),

    #[error("overlay has no documents")]
    ZeroOverlay,

    #[error("years must be strictly increasing ({previous} then {next})")]
    YearsNotIncreasing { previous: i32, next: i32 },

    #[error("basemap format: {0}")]
    Basemap(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
