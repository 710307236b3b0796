use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("record {index}: {detail}")]
    InvalidRecord { index: usize, detail: String },

    #[error("datasets use different schemas")]
    SchemaMismatch,

    #[error("datasets have different record counts ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },

    #[error("dataset is outside the domain: {0}")]
    OutsideDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} exceeds enumeration cap: estimated {estimate} > {cap}")]
    CapExceeded {
        what: String,
        estimate: u128,
        cap: u128,
    },

    #[error("probability masses do not sum to 1: {0}")]
    MassNotOne(String),

    #[error("csv error{}: {message}", .line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Csv { line: Option<u64>, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
