use thiserror::Error;

/// Errors raised by the delay-Doppler simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid pulse parameters: {0}")]
    InvalidPulse(String),

    #[error("pulse sampling produced a non-finite value at (m={m}, n={n})")]
    NonFiniteSample { m: i64, n: i64 },

    #[error("pulse energy is {energy}, expected unit energy")]
    NotUnitEnergy { energy: f64 },

    #[error("path {index} lies outside the principal cell: {reason}")]
    PathOutOfCell { index: usize, reason: String },

    #[error("invalid channel model: {0}")]
    InvalidChannel(String),

    #[error("argument {re}{im:+}i outside the guarded range of the error function")]
    ErfRange { re: f64, im: f64 },

    #[error("matrix is not Hermitian positive semi-definite: {0}")]
    NotPsd(String),

    #[error("non-finite channel matrix")]
    NonFiniteChannel,

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
