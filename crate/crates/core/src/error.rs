use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The multiplier bracket could not be established. Usually means the
    /// sample set cannot reach the threshold at any multiplier (e.g. all `η = 0`).
    #[error("calibration failed for {kind}: {reason}")]
    CalibrationFailed { kind: String, reason: String },

    #[error("oracle multiplier range [{lo:e}, {hi:e}] does not bracket q = {q}")]
    OracleRange { lo: f64, hi: f64, q: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
