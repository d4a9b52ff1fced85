use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Model-string grammar violations.
    #[error("model string parse error: {0}")]
    Parse(String),

    /// Tensor shapes, bindings, or operand counts that do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A requested tensor would not fit in addressable memory.
    #[error("dimension overflow: {0}")]
    DimensionOverflow(String),

    /// A loss specification that cannot be constructed or used as asked.
    #[error("invalid loss: {0}")]
    InvalidLoss(String),

    /// Data outside the domain of the selected loss.
    #[error("loss domain error: {0}")]
    LossDomain(String),

    /// A masked evaluation with no selected entries.
    #[error("empty evaluation set")]
    EmptyEvaluationSet,

    /// Anything else the caller handed us that fails validation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A tensor or manifest file that cannot be decoded.
    #[error("malformed file: {0}")]
    MalformedFile(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
