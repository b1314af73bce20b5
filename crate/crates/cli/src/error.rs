use std::path::Path;

use chad_core::{CompareError, ConfigError, FormatError, SimulationError};
use chad_field::{FieldError, SnapshotError};
use thiserror::Error;

/// Process exit status, one per error class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Other = 1,
    Config = 2,
    Io = 3,
    Parse = 4,
    Solver = 5,
    Mismatch = 6,
}

pub const EXIT_CODE_HELP: &str = "Exit codes:
  0  success
  1  other failure
  2  invalid configuration or arguments
  3  file system error
  4  malformed input data
  5  solver failure (non-convergence, invalid state)
  6  data mismatch (time grids, snapshot times or particle ids)";

#[derive(Debug, Error)]
#[error("{context}{msg}")]
pub struct CliError {
    pub class: ExitClass,
    context: String,
    msg: String,
}

impl CliError {
    pub fn new(class: ExitClass, msg: impl std::fmt::Display) -> Self {
        Self {
            class,
            context: String::new(),
            msg: msg.to_string(),
        }
    }

    pub fn config(msg: impl std::fmt::Display) -> Self {
        Self::new(ExitClass::Config, msg)
    }

    /// Prefix the message with the file it concerns.
    pub fn in_file(mut self, path: &Path) -> Self {
        self.context = format!("{}: {}", path.display(), self.context);
        self
    }

    pub fn code(&self) -> i32 {
        self.class as i32
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(ExitClass::Io, e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::new(ExitClass::Config, e)
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        Self::new(ExitClass::Solver, e)
    }
}

impl From<CompareError> for CliError {
    fn from(e: CompareError) -> Self {
        Self::new(ExitClass::Mismatch, e)
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Io(e) => e.into(),
            e => Self::new(ExitClass::Parse, e),
        }
    }
}

impl From<SnapshotError> for CliError {
    fn from(e: SnapshotError) -> Self {
        match e {
            SnapshotError::Io(e) => e.into(),
            e => Self::new(ExitClass::Parse, e),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        let class = match &e {
            FieldError::Snapshot(SnapshotError::Io(_)) | FieldError::Io(_) => ExitClass::Io,
            FieldError::Snapshot(_) | FieldError::Parse { .. } => ExitClass::Parse,
            FieldError::Config(_) => ExitClass::Config,
            FieldError::TimeGap { .. } | FieldError::IdMismatch(_) => ExitClass::Mismatch,
            FieldError::Particle { .. } => ExitClass::Solver,
        };
        Self::new(class, e)
    }
}

impl From<chad_field::engine::EngineError> for CliError {
    fn from(e: chad_field::engine::EngineError) -> Self {
        Self::new(ExitClass::Config, e)
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        Self::new(ExitClass::Config, e)
    }
}

impl From<chad_core::SolverError> for CliError {
    fn from(e: chad_core::SolverError) -> Self {
        let class = match &e {
            chad_core::SolverError::Config(_) => ExitClass::Config,
            _ => ExitClass::Solver,
        };
        Self::new(class, e)
    }
}
