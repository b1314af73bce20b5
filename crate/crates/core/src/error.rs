use thiserror::Error;

use crate::state::Component;

/// Errors raised while reading or validating parameter, state and reactor
/// configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Domain errors of the inhibition and rate functions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticsError {
    #[error("{name} = {value} is outside the valid domain ({why})")]
    Domain {
        name: &'static str,
        value: f64,
        why: &'static str,
    },
    #[error("invalid state: {component} = {value:e} is negative beyond tolerance {tolerance:e}")]
    InvalidState {
        component: Component,
        value: f64,
        tolerance: f64,
    },
}

/// One iterate of a scalar root solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iterate {
    pub x: f64,
    pub residual: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("{what} failed to converge after {} iterates (last residual {last_residual:e})", trace.len())]
    Convergence {
        what: &'static str,
        last_residual: f64,
        trace: Vec<Iterate>,
    },
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
}

/// A solver failure tagged with the simulation time at which it happened.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("at t = {time_d} d: {source}")]
pub struct SimulationError {
    pub time_d: f64,
    #[source]
    pub source: SolverError,
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("time grids differ: {0}")]
    GridMismatch(String),
    #[error("reference series `{0}` is identically zero")]
    ZeroReference(String),
}

/// Malformed tabular or binary data, with the 1-based line where known.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
