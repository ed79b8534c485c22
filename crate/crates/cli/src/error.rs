use thiserror::Error;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Bundle(String),
    #[error("{0}")]
    MissingData(String),
    #[error("generation failed in {component}: {message}")]
    Generation { component: String, message: String },
    #[error("{0}")]
    Divergence(String),
    #[error("{0}")]
    Io(String),
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const BUNDLE_OR_DATA: i32 = 3;
    pub const GENERATION: i32 = 4;
    pub const DIVERGENCE: i32 = 5;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Bundle(_) | CliError::MissingData(_) => exit::BUNDLE_OR_DATA,
            CliError::Generation { .. } => exit::GENERATION,
            CliError::Divergence(_) => exit::DIVERGENCE,
            CliError::Io(_) => exit::IO,
        }
    }

    pub fn io(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{context}: {e}"))
    }
}
