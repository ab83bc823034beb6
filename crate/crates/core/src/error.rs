use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("term limits exceeded: {0}")]
    TermLimit(String),

    #[error("invalid model space: {0}")]
    InvalidSpace(String),

    #[error("model violates the heredity condition")]
    InvalidModel,

    #[error("model space has more than {cap} models; sample instead of enumerating")]
    CapExceeded { cap: u64 },

    #[error("closed-form count requires a full quadratic surface over an intercept-only base")]
    NotQuadratic,

    #[error("prior: {0}")]
    Prior(String),

    #[error("saturated fit: n = {n} does not exceed model rank {rank}")]
    Saturated { n: usize, rank: usize },

    #[error("data: {0}")]
    Data(String),

    #[error("data line {line}: {message}")]
    DataLine { line: u64, message: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("cache already holds {old} for this model, refusing {new}")]
    CacheConflict { old: f64, new: f64 },

    #[error("posterior table is empty")]
    EmptyTable,

    #[error("cannot parse term {0:?}")]
    TermParse(String),
}
