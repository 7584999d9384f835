use thiserror::Error;

pub type Result<T> = std::result::Result<T, KdvError>;

#[derive(Debug, Error)]
pub enum KdvError {
    /// Input rejected before any computation.
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl KdvError {
    pub fn validation(msg: impl Into<String>) -> Self {
        KdvError::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        KdvError::Numerical(msg.into())
    }

    pub fn is_validation(&self) -> bool {
        matches!(self, KdvError::Validation(_))
    }
}
