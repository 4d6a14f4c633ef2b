use crate::cache::CacheError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const ASSERTION: u8 = 1;
    pub const USAGE: u8 = 2;
    /// Only with `--strict`: some result was left undetermined.
    pub const UNDETERMINED: u8 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    /// A recomputed value disagreed with an expected one; the string names
    /// the failing assertion.
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error(transparent)]
    Core(#[from] shimura_core::Error),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use shimura_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::Domain(_) | E::Unsupported(_)) => exit::USAGE,
            _ => exit::ASSERTION,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
