//! Orchestration behind the `forge` binary: pipeline configuration, run
//! manifests and the subcommand implementations.

pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod manifest;

use std::process::ExitCode;

use thiserror::Error;

/// Failure classes that map to process exit codes.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    Failure::Config(msg.into()).into()
}

pub fn data_error(msg: impl Into<String>) -> anyhow::Error {
    Failure::Data(msg.into()).into()
}

/// Exit code for an error: 1 for configuration problems, 2 otherwise.
pub fn exit_code_for(err: &anyhow::Error) -> ExitCode {
    let code = err
        .chain()
        .find_map(|e| e.downcast_ref::<Failure>())
        .map_or(2, Failure::exit_code);
    ExitCode::from(code)
}
