use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: String, hi: String },

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("query precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid generator spec: {0}")]
    InvalidGenerator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
