use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular tridiagonal system (zero pivot at row {row})")]
    Singular { row: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("non-finite field detected at t = {time}")]
    Blowup { time: f64 },

    #[error("decomposition failed after {iterations} Newton iterations (residual {residual:.3e})")]
    Decomposition { iterations: usize, residual: f64 },

    #[error("ill-conditioned modulation Jacobian (vanishing pivot in column {column})")]
    Conditioning { column: usize },

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
