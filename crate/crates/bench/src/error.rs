use thiserror::Error;

/// Failures of the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] cspsa_core::Error),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("statistics: {0}")]
    Statistics(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
