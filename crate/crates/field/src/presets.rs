//! Lab-scale particle case.

use chad_core::integrate::Scheme;
use chad_core::presets::{CASE1_K_P, CASE1_V_GAS, CASE1_V_LIQ};
use chad_core::{AdmParams, NewtonConfig};

use crate::field::{FieldConfig, SyncPolicy};
use crate::generate::CylinderSpec;

pub const CASE2_V_TANK: f64 = 8.0e-3;
pub const CASE2_PARTICLES: usize = 128_726;
/// s.
pub const CASE2_DURATION: f64 = 200.0;
pub const CASE2_TEMPERATURE: f64 = 308.5;
pub const CASE2_P_ATM: f64 = 1.013;
pub const CASE2_MIXER_RPM: f64 = 12.0;
/// Per-particle volume as tabulated for the lab case. The field always uses
/// `V_tank / N` instead; this value is only reported next to it.
pub const CASE2_TABULATED_PARTICLE_VOLUME: f64 = 6.4e-8;
pub const CASE2_OUTER_DT: f64 = 0.5;
pub const CASE2_SUBSTEPS: u32 = 10;

/// Headspace volume for a tank of liquid volume `v_tank`, keeping the
/// full-scale gas-to-liquid ratio.
pub fn default_gas_volume(v_tank: f64) -> f64 {
    v_tank * CASE1_V_GAS / CASE1_V_LIQ
}

/// Outlet conductance for a headspace of `v_gas`, keeping the full-scale
/// conductance per unit gas volume.
pub fn default_conductance(v_gas: f64) -> f64 {
    CASE1_K_P * v_gas / CASE1_V_GAS
}

pub fn case2_params() -> AdmParams {
    AdmParams::default_at(CASE2_TEMPERATURE, CASE2_P_ATM)
}

pub fn case2_field_config() -> FieldConfig {
    let v_gas = default_gas_volume(CASE2_V_TANK);
    FieldConfig {
        v_tank: CASE2_V_TANK,
        v_gas,
        k_p: default_conductance(v_gas),
        params: case2_params(),
        newton: NewtonConfig::default(),
        scheme: Scheme::FixedEuler,
    }
}

pub fn case2_policy() -> SyncPolicy {
    SyncPolicy {
        outer_dt: CASE2_OUTER_DT,
        inner_substeps: CASE2_SUBSTEPS,
    }
}

/// Cylinder holding the lab tank volume, radius 0.1 m.
pub fn case2_cylinder() -> CylinderSpec {
    let radius = 0.1;
    CylinderSpec {
        radius,
        height: CASE2_V_TANK / (std::f64::consts::PI * radius * radius),
        rpm: CASE2_MIXER_RPM,
    }
}
