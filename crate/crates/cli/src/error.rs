use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] pgrad::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// A verification ran to completion and an assertion failed.
    pub const ASSERTION_FAILED: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const INCONCLUSIVE: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use pgrad::Error as E;
        match self {
            CliError::Input(_) | CliError::Io { .. } => exit::INPUT,
            CliError::Core(e) => match e {
                E::InvalidParams(_) | E::Regime(_) | E::Parse { .. } | E::Unsupported(_) => exit::INPUT,
                E::InsufficientSamples { .. } | E::ConflictingFits(_) => exit::INCONCLUSIVE,
                _ => exit::NUMERICAL,
            },
        }
    }
}
