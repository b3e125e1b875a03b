//! Library half of the `rabicat` binary, split out so tests can drive the
//! subcommands without spawning a process.

pub mod commands;
pub mod config;
pub mod verify;

use thiserror::Error;

pub use config::{parse_config, ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] rabicat_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl RunError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(rabicat_core::Error::InvalidParams(_))
            | RunError::Core(rabicat_core::Error::InvalidTruncation(_))
            | RunError::Core(rabicat_core::Error::PolicyMissing) => 2,
            _ => 1,
        }
    }
}
