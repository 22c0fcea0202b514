use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The requested instance exceeds a configured enumeration budget.
    #[error("capacity exceeded: {what} needs 2^{needed_log2:.2} but the limit is 2^{limit_log2}")]
    Capacity {
        what: &'static str,
        needed_log2: f64,
        limit_log2: u32,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Debug-mode cross-check between two evaluation routes failed.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("malformed serialized polynomial: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
