use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("invalid config: {0}")]
    Invalid(String),

    #[error("rate fit: {0}")]
    Fit(String),

    #[error("unknown study kind `{0}`")]
    UnknownStudy(String),

    #[error(transparent)]
    Core(#[from] wickgp_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
