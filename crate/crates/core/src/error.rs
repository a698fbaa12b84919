use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid too coarse: horizon {available:.3} < required {required:.3}")]
    GridTooCoarse { required: f64, available: f64 },

    #[error("profiles live on different grids")]
    MismatchedGrids,

    #[error("band escape: {0}")]
    BandEscape(String),

    #[error("Laplace row grid too short: need sigma_max >= {required:.4}, got {got:.4}")]
    LaplaceTail { required: f64, got: f64 },

    #[error("power iteration did not converge after {iterations} steps (last estimate {last})")]
    NoConvergence { iterations: usize, last: f64 },

    #[error("unknown data name `{0}`")]
    UnknownData(String),

    #[error("invalid value for `{flag}`: {msg}")]
    Validation { flag: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
