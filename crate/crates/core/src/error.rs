use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed on-disk data (bad magic, truncated payload, bad header).
    #[error("format error: {0}")]
    Format(String),
    /// Well-formed data whose values violate a domain invariant.
    #[error("data error: {0}")]
    Data(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("index {index} out of range for {len} nodes")]
    Index { index: usize, len: usize },
    #[error("graph is disconnected: {components} components remain")]
    Connectivity { components: usize },
    /// A precondition of an operation was not met by the caller.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("linear solver failure: {0}")]
    Solver(String),
    /// The quantity is mathematically undefined for the given input.
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of internal assertions as opposed to bad user input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Contract(_) | Error::Solver(_))
    }
}
