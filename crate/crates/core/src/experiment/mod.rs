//! Batch front end: config parsing, the four commands and their CSV artifacts.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};

pub use commands::{
    cmd_solve, cmd_spectral, cmd_sweep, cmd_verify, discretize, initial_data, spectral_report, trajectory_report,
    verify_report, Outcome,
};
pub use config::{
    parse_config, parse_config_detailed, Coefficient, ConfigErrors, ConfigIssue, DomainBlock, ExperimentConfig,
    OperatorBlock, OutputBlock, ParsedConfig, SolverBlock, SweepBlock, KEYS,
};
pub use output::{ArtifactWriter, OutputOptions};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("configuration rejected:\n{0}")]
    Config(#[from] ConfigErrors),

    #[error(transparent)]
    Runtime(#[from] crate::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl ExperimentError {
    /// 2 for configuration problems, 3 for anything that fails while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            _ => 3,
        }
    }
}

/// Reads and parses a config file; an unreadable file is a config error.
pub fn load_config(path: &Path) -> Result<ParsedConfig, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigErrors(vec![ConfigIssue {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        }])
    })?;
    Ok(parse_config_detailed(&text)?)
}
