//! Anaerobic digestion kinetics (ADM1) with algebraic pH and hydrogen
//! solves, and a fixed-step tank reactor built on them.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod inhibition;
pub mod integrate;
pub mod kinetics;
pub mod params;
pub mod presets;
pub mod reactor;
pub mod solver;
pub mod state;
pub mod stoichiometry;

pub use error::{CompareError, ConfigError, FormatError, KineticsError, SimulationError, SolverError};
pub use integrate::{IntegratorConfig, Scheme, StepStats};
pub use params::{AdmParams, HillForm, ParamSet};
pub use reactor::{relative_rmse, run, AlgebraicMode, Reactor, ReactorConfig, Series, Trajectory};
pub use solver::{solve_proton, solve_sh2, Dilution, NewtonConfig};
pub use state::{AdmState, Component, N_STATES};
