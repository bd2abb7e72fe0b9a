//! Crate-wide error type.
//!
//! Every fallible operation returns [`Error`]. Each variant maps to a stable
//! machine-readable category string (see [`Error::category`]) so callers such
//! as the CLI can report failures to scripts without parsing display text.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two vectors (or a vector and a layer) disagree on dimension.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A vector's norm fell below the degeneracy floor. A near-zero latent
    /// signals a network or input bug, not a distance of zero.
    #[error("degenerate vector: norm {norm:.3e} is below the floor {floor:.3e}")]
    DegenerateVector { norm: f64, floor: f64 },

    /// Catch-all for malformed arguments (empty inputs, bad counts, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Ordinal machinery requires at least three categories.
    #[error("unsupported category count {found}: need at least 3")]
    UnsupportedCategoryCount { found: usize },

    /// A category rank fell outside `[0, C)`.
    #[error("rank {rank} out of range for {categories} categories")]
    RankOutOfRange { rank: usize, categories: usize },

    /// A triplet template referenced a category with no samples.
    #[error("no samples available for category rank {rank}")]
    MissingCategory { rank: usize },

    /// A category is too small for the requested operation.
    #[error("category rank {rank} has {found} samples, need at least {needed}")]
    InsufficientSamples {
        rank: usize,
        found: usize,
        needed: usize,
    },

    /// The network produced a pre-normalization output with near-zero norm.
    #[error("degenerate network output ({context}): pre-normalization norm {norm:.3e}")]
    DegenerateOutput { context: String, norm: f64 },

    /// An embedding that must be unit-norm was not.
    #[error("embedding is not unit-norm: |norm - 1| = {deviation:.3e}")]
    NonUnitEmbedding { deviation: f64 },

    /// Rank correlation is undefined on a constant matrix.
    #[error("monotonicity score undefined: all distance-matrix entries are equal")]
    UndefinedCorrelation,

    /// A data cell does not appear in the schema's level list.
    #[error("schema violation at row {row}, column {column:?}: unknown value {value:?}")]
    SchemaViolation {
        row: usize,
        column: String,
        value: String,
    },

    /// The input file could not be parsed as delimiter-separated values.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    /// A model file declared a format version this build does not read.
    #[error("unsupported model format version {found:?}")]
    UnsupportedVersion { found: String },

    /// A model file failed its checksum or structural checks.
    #[error("corrupt model file: {0}")]
    Corruption(String),

    /// A configuration value is out of range or inconsistent, named by field.
    #[error("config error in {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable category for scripting against the CLI's
    /// diagnostic stream.
    pub fn category(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::DegenerateVector { .. } => "degenerate-vector",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::UnsupportedCategoryCount { .. } => "unsupported-category-count",
            Error::RankOutOfRange { .. } => "rank-out-of-range",
            Error::MissingCategory { .. } => "missing-category",
            Error::InsufficientSamples { .. } => "insufficient-samples",
            Error::DegenerateOutput { .. } => "degenerate-output",
            Error::NonUnitEmbedding { .. } => "non-unit-embedding",
            Error::UndefinedCorrelation => "undefined-correlation",
            Error::SchemaViolation { .. } => "schema-violation",
            Error::Parse { .. } => "parse",
            Error::UnsupportedVersion { .. } => "unsupported-version",
            Error::Corruption(_) => "corruption",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}
