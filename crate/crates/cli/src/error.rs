//! CLI errors with machine-readable categories and stable exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("unknown experiment: {0}")]
    UnknownExperiment(String),

    #[error("missing run artifact: {0}")]
    MissingArtifact(String),

    #[error("unknown figure id: {0}")]
    UnknownFigure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] levysim_core::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::UnknownExperiment(_) => "unknown_experiment",
            CliError::MissingArtifact(_) => "missing_artifact",
            CliError::UnknownFigure(_) => "unknown_figure",
            CliError::Io(_) => "io",
            CliError::Core(_) => "compute",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::UnknownExperiment(_) => 3,
            CliError::MissingArtifact(_) | CliError::UnknownFigure(_) => 4,
            CliError::Io(_) => 5,
            CliError::Core(_) => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
