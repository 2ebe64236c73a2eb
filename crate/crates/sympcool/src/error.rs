//! Crate-wide error type, split by how the CLI must report failures:
//! configuration problems exit with code 2, numerical failures with code 1.

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad or inconsistent configuration — wrong units, violated invariants,
    /// unreadable config files. CLI exit code 2.
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical failure — solver non-convergence, instability, invariant
    /// violation during integration, eigensolver breakdown. CLI exit code 1.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Output/filesystem failure while persisting results. CLI exit code 1.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI should use for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Numerical(_) | Error::Io(_) => 1,
        }
    }
}
