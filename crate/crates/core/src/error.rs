use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid grid or solver configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// An operation was called on data it does not accept (wrong space tag,
    /// mismatched grids, too few samples, ...).
    #[error("usage error: {0}")]
    Usage(String),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("sup norm {sup:e} exceeded {limit:e} at t = {time}; focusing blow-up proxy")]
    BlowUp { time: f64, sup: f64, limit: f64 },
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
