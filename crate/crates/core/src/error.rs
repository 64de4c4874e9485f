use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Bracket expansion ran past the configured span; the shape function
    /// does not satisfy the monotone / vanishing-at-minus-infinity contract.
    #[error("no solution within span {span}: {reason}")]
    NoSolution { span: f64, reason: String },
    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },
    #[error("data error: {0}")]
    Data(String),
    #[error("undefined SNR: {0}")]
    UndefinedSnr(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
