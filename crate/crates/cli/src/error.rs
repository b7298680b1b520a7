use thiserror::Error;

use rccs_core::Error as CoreError;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    /// A suite case failed, or an expected equivalence did not hold.
    pub const VERDICT: u8 = 1;
    pub const USAGE: u8 = 2;
    /// A state-space or unfolding cap was hit.
    pub const RESOURCE: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON in `{path}`: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CoreError::Explosion(_) | CoreError::UnguardedRecursion(_)) => exit::RESOURCE,
            _ => exit::USAGE,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
