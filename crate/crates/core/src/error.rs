//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input dimensions do not line up (design vs. response, model vs. design, ...).
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// The design matrix is numerically rank deficient.
    #[error("rank-deficient design: column {column} ({name}) is linearly dependent")]
    RankDeficient { column: usize, name: String },

    /// A probability parameter outside [0, 1].
    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    /// Malformed input file: missing columns, unparseable cells.
    #[error("schema error: {0}")]
    SchemaError(String),

    /// A record violates the missingness bookkeeping (e.g. r0 = 0 with a
    /// non-empty y0 cell) or the dataset violates its regime.
    #[error("consistency error{}: {msg}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    ConsistencyError { row: Option<usize>, msg: String },

    /// The dataset has no treated or no control units.
    #[error("empty group: {0}")]
    EmptyGroup(String),

    /// Cross-fitting fold count outside [2, n].
    #[error("invalid fold count J = {j} for n = {n} (need 2 <= J <= n)")]
    InvalidFoldCount { j: usize, n: usize },

    /// A feature map or influence function needs an input the sample lacks.
    #[error("missing input: {0}")]
    MissingInput(String),

    /// A required training subpopulation is empty.
    #[error("empty cell: {0}")]
    EmptyCell(String),

    /// Dataset regime and estimator configuration disagree.
    #[error("regime mismatch: data is {data}, configuration wants {config}")]
    RegimeMismatch { data: String, config: String },

    /// A model fit failed; carries the failing nuisance for context.
    #[error("fit failure for {context}: {source}")]
    FitFailure {
        context: String,
        #[source]
        source: Box<Error>,
    },

    /// An influence-function evaluation produced a non-finite value. The
    /// clipping of probability nuisances is meant to make this unreachable.
    #[error("non-finite result in {0}")]
    NonFiniteResult(&'static str),

    /// Invalid run configuration (CLI / simulation parameters).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wrap an error with the nuisance/cell it occurred in.
    pub fn in_context(self, context: impl Into<String>) -> Self {
        Error::FitFailure {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
