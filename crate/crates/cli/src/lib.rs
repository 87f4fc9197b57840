//! Run configuration, snapshot persistence and the study drivers behind the
//! `rdspectral` command.

pub mod compare;
pub mod config;
pub mod run;
pub mod snapshot;

use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rdspectral::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("corrupt snapshot {0}")]
    Corrupt(String),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// 2 for aborted integrations, 1 for everything the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(rdspectral::Error::BlowUp { .. } | rdspectral::Error::StepUnderflow { .. }) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
