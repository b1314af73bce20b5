//! Built-in tank case and the embedded benchmark state files.

use crate::error::ConfigError;
use crate::params::AdmParams;
use crate::reactor::{AlgebraicMode, Reactor, ReactorConfig};
use crate::solver::NewtonConfig;
use crate::state::AdmState;

pub const BSM2_INITIAL: &str = include_str!("../data/bsm2_initial.state");
pub const BSM2_INFLOW: &str = include_str!("../data/bsm2_inflow.state");

pub const CASE1_V_LIQ: f64 = 3400.0;
pub const CASE1_V_GAS: f64 = 300.0;
pub const CASE1_FLOW: f64 = 178.45;
pub const CASE1_TEMPERATURE: f64 = 308.5;
pub const CASE1_P_ATM: f64 = 1.013;
/// Gas outlet conductance of the full-scale tank, m³ d⁻¹ bar⁻¹.
pub const CASE1_K_P: f64 = 5.0e4;

pub fn bsm2_initial_state() -> AdmState {
    AdmState::parse(BSM2_INITIAL).expect("embedded initial state is valid")
}

pub fn bsm2_inflow() -> AdmState {
    AdmState::parse(BSM2_INFLOW).expect("embedded inflow is valid")
}

pub fn case1_config() -> ReactorConfig {
    ReactorConfig {
        v_liq: CASE1_V_LIQ,
        v_gas: CASE1_V_GAS,
        q_in: CASE1_FLOW,
        q_out: CASE1_FLOW,
        k_p: CASE1_K_P,
        inflow: bsm2_inflow(),
    }
}

pub fn case1_params() -> AdmParams {
    AdmParams::default_at(CASE1_TEMPERATURE, CASE1_P_ATM)
}

pub fn case1_reactor(mode: AlgebraicMode) -> Result<Reactor, ConfigError> {
    Reactor::new(case1_config(), case1_params(), mode, NewtonConfig::default())
}
