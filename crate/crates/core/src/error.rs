use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Encoding order 21 was requested for a scenario that has a single order.
    #[error("encoding order {order} is not defined for scenario {scenario}")]
    UnsupportedOrder { scenario: char, order: &'static str },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The dual bracket never produced a power crossing.
    #[error("lambda bracket [{lambda_min}, {lambda_max}] does not bracket the power budget: {detail}")]
    Bracket {
        lambda_min: f64,
        lambda_max: f64,
        detail: String,
    },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
