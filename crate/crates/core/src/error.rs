use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A CSV record could not be turned into a valid sample.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    /// Fewer usable samples than an operation needs.
    #[error("insufficient data: need at least {needed} samples, found {found}")]
    InsufficientData { needed: usize, found: usize },

    /// Timestamps failed to increase strictly.
    #[error("line {line}: timestamp {time} does not exceed previous timestamp {previous}")]
    Ordering { line: u64, time: f64, previous: f64 },

    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The exact fBm method cannot serve the requested size.
    #[error("capacity exceeded: {requested} steps requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },

    /// A capital update would leave the investor with non-positive wealth.
    #[error("prudence violation: growth factor {factor} is not positive")]
    Prudence { factor: f64 },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
