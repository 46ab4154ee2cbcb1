//! Experiment runner behind the `cfbmc` binary.
//!
//! An [`ExperimentConfig`] names a packet geometry, the transmit and receive
//! window kinds and one experiment. Running it writes CSV curves and maps
//! plus a JSON manifest that embeds the resolved config.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Library(#[from] cfbmc::Error),
}

impl CliError {
    /// 1 for configuration and I/O problems. Validation failures are
    /// reported through the report, not through this type.
    pub fn exit_code(&self) -> u8 {
        1
    }
}
