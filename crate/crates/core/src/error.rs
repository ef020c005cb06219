use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate column {col}: zero sum with ridge=0")]
    DegenerateColumn { col: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("numeric divergence at iteration {iteration}: {what}")]
    Divergence { iteration: usize, what: String },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("chunking error: {0}")]
    Chunking(String),

    #[error("format error at record {record}: {msg}")]
    Format { record: usize, msg: String },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("training diverged at epoch {epoch}")]
    Training { epoch: usize },

    #[error("labeling budget exhausted: all pool samples labeled")]
    BudgetComplete,

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
