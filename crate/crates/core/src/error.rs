use thiserror::Error;

/// Errors produced by valuation construction, evaluation and scoring.
#[derive(Debug, Error)]
pub enum Error {
    /// Feature count exceeds the cap an exact or exhaustive routine can handle.
    #[error("feature count {n} exceeds cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    /// A table valuation has no entry for the queried subset.
    #[error("value table has no entry for subset {{{key}}}")]
    MissingEntry { key: String },

    /// The external oracle failed: bad exit status, unparsable or negative reply.
    #[error("oracle failure: {reason}")]
    OracleFailure { reason: String },

    /// The empty set must evaluate to zero.
    #[error("normalization violated: value of the empty set is {value}, expected 0")]
    Normalization { value: f64 },

    /// A table entry is not a finite nonnegative number.
    #[error("invalid value {value} for subset {{{key}}}: must be finite and nonnegative")]
    InvalidValue { key: String, value: f64 },

    /// Dataset has no rows.
    #[error("dataset is empty")]
    EmptyDataset,

    /// Dataset rows disagree in arity, or a cell cannot be interpreted.
    #[error("malformed dataset: {0}")]
    MalformedDataset(String),

    /// Branch and bound requires a monotone valuation.
    #[error(
        "valuation is not monotone: \u{3bd}({{{small_key}}}) = {small_value} > \u{3bd}({{{large_key}}}) = {large_value}"
    )]
    NonMonotone {
        small_key: String,
        large_key: String,
        small_value: f64,
        large_value: f64,
    },

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// NDCG needs at least one relevant feature.
    #[error("relevance set is empty")]
    EmptyRelevanceSet,

    /// A ranking prefix mentions a feature outside the universe.
    #[error("prefix entry {id} is not in the universe")]
    PrefixNotInUniverse { id: usize },

    /// Ranking prefixes compared by MKD must have equal length.
    #[error("prefix lengths differ: {left} vs {right}")]
    PrefixLengthMismatch { left: usize, right: usize },

    /// Malformed subset key in a table file or context list.
    #[error("invalid subset key {key:?}: {reason}")]
    InvalidSubsetKey { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
