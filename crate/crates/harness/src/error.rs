use thiserror::Error;

/// Failures of a harness run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid arguments: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] qrl_core::Error),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config file: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// 2 for bad input (including points outside the tetrahedron), 3 for
    /// numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        use qrl_core::Error as E;
        match self {
            HarnessError::Usage(_) | HarnessError::Config(_) => 2,
            HarnessError::Core(E::Tetrahedron(_) | E::OutOfRange { .. } | E::DimensionMismatch { .. }) => 2,
            HarnessError::Core(_) | HarnessError::Numerical(_) => 3,
            HarnessError::Io(_) | HarnessError::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
