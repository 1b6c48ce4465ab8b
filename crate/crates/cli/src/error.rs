use cwdiss_core::macroflow::MacroError;
use cwdiss_core::microsim::SimError;
use cwdiss_core::{GammaError, ModDevError, PhaseError};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    /// Unwritable outputs are reported as usage errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io { .. } => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<GammaError> for CliError {
    fn from(e: GammaError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::ZeroHits => Self::Numerical(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<MacroError> for CliError {
    fn from(e: MacroError) -> Self {
        match e {
            MacroError::InvalidRadius(_) => Self::Config(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<PhaseError> for CliError {
    fn from(e: PhaseError) -> Self {
        match e {
            PhaseError::DegenerateGamma | PhaseError::NotApplicable(_) => Self::Config(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<ModDevError> for CliError {
    fn from(e: ModDevError) -> Self {
        match e {
            ModDevError::UnboundedSup | ModDevError::Ode(_) => Self::Numerical(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}
