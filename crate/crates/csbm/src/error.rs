use thiserror::Error;

/// Errors produced by model construction, file I/O and numeric routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain required by an operation.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A spec, dataset or config failed a structural validation check.
    #[error("validation error: {0}")]
    Validation(String),

    /// A data file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Parameter estimation hit a block with no members.
    #[error("block {0} is empty")]
    EmptyBlock(usize),

    /// An exhaustive computation was requested on too large an instance.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// Label vectors of different lengths were compared.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A numeric routine failed to converge or produced non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
