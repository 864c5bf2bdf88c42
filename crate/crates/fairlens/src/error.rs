use crate::mine::TrainTrace;
use thiserror::Error;

/// Errors produced by the fairlens library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value or combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// Matrix or vector shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Malformed, non-finite, or out-of-range input data.
    #[error("data error: {0}")]
    Data(String),

    /// An operation that needs attribute variation got a constant attribute.
    /// Bias with respect to a constant attribute is undefined.
    #[error("degenerate attribute: {0}")]
    DegenerateAttribute(String),

    /// Estimator training produced a non-finite loss. The partial trace is
    /// attached so callers can dump it for inspection.
    #[error("training diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        trace: Box<TrainTrace>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
