use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature order {mq} is below the dealiasing margin 2*K = {}", 2 * .k)]
    UnderResolvedGrid { k: usize, mq: usize },

    #[error("basis cutoff K must be at least 1")]
    EmptyBasis,

    #[error("truncation level N = {n} exceeds the basis resolution (need N <= K-1 = {})", .k - 1)]
    UnderResolvedTruncation { n: usize, k: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("exponential weight overflow: |a * Y| reached {0:.3} (limit 700)")]
    ExpOverflow(f64),

    #[error("suspected blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed record: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
