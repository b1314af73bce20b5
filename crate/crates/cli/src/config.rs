//! Run configuration: TOML file, presets, and validation. Command-line flags
//! are applied on top by the commands; flags always win.

use std::path::{Path, PathBuf};

use chad_core::integrate::Scheme;
use chad_core::presets as tank;
use chad_core::{AdmParams, AdmState, AlgebraicMode, NewtonConfig, ParamSet, ReactorConfig};
use chad_field::presets as lab;
use chad_field::{FieldConfig, SyncPolicy};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Cstr,
    Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Case1,
    Case2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: Case,
    /// Worker threads; physical core count when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub conditions: Conditions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cstr: Option<CstrSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSection>,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub solver: NewtonConfig,
    #[serde(default, skip_serializing_if = "Paths::is_empty")]
    pub paths: Paths,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conditions {
    /// K.
    pub temperature: f64,
    /// bar.
    pub p_atm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CstrSection {
    /// m³.
    pub v_liq: f64,
    pub v_gas: f64,
    /// m³/d.
    pub q_in: f64,
    pub q_out: f64,
    /// m³ d⁻¹ bar⁻¹.
    pub k_p: f64,
    pub duration_days: f64,
    pub record_interval_days: f64,
    #[serde(default)]
    pub mode: AlgebraicMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    /// m³.
    pub v_tank: f64,
    pub v_gas: f64,
    /// m³ d⁻¹ bar⁻¹.
    pub k_p: f64,
    /// Mixer speed of the generated snapshots, rpm.
    pub mixer_rpm: f64,
    /// s.
    pub duration: f64,
    /// Particle count of generated snapshots. A run uses whatever the
    /// snapshots contain.
    pub particles: usize,
    /// Tabulated particle volume, m³. Reported only: the field uses V_tank / N.
    pub particle_volume: f64,
    /// Snapshot spacing, s.
    pub outer_dt: f64,
    pub inner_substeps: u32,
    /// Export every this many outer steps (0: initial and final only).
    pub export_every: usize,
    pub export_components: Vec<String>,
    pub export_format: FileFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub scheme: Scheme,
    /// Tank step, s. Field runs step at `outer_dt / inner_substeps`.
    pub dt: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            scheme: Scheme::FixedEuler,
            dt: 0.05,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Parameter file; the embedded defaults when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<PathBuf>,
    /// Initial state file; the BSM2 initial state when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<PathBuf>,
    /// Inflow composition file; the BSM2 inflow when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inflow: Option<PathBuf>,
    /// Snapshot directory (field runs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<PathBuf>,
    /// Trajectory CSV (tank) or export directory (field).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Paths {
    fn is_empty(&self) -> bool {
        *self == Paths::default()
    }
}

impl RunConfig {
    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Case1 => Self {
                case: Case::Cstr,
                workers: None,
                conditions: Conditions {
                    temperature: tank::CASE1_TEMPERATURE,
                    p_atm: tank::CASE1_P_ATM,
                },
                cstr: Some(CstrSection {
                    v_liq: tank::CASE1_V_LIQ,
                    v_gas: tank::CASE1_V_GAS,
                    q_in: tank::CASE1_FLOW,
                    q_out: tank::CASE1_FLOW,
                    k_p: tank::CASE1_K_P,
                    duration_days: 60.0,
                    record_interval_days: 0.01,
                    mode: AlgebraicMode::Dae,
                }),
                field: None,
                integrator: IntegratorSection::default(),
                solver: NewtonConfig::default(),
                paths: Paths::default(),
            },
            Preset::Case2 => {
                let v_gas = lab::default_gas_volume(lab::CASE2_V_TANK);
                Self {
                    case: Case::Field,
                    workers: None,
                    conditions: Conditions {
                        temperature: lab::CASE2_TEMPERATURE,
                        p_atm: lab::CASE2_P_ATM,
                    },
                    cstr: None,
                    field: Some(FieldSection {
                        v_tank: lab::CASE2_V_TANK,
                        v_gas,
                        k_p: lab::default_conductance(v_gas),
                        mixer_rpm: lab::CASE2_MIXER_RPM,
                        duration: lab::CASE2_DURATION,
                        particles: lab::CASE2_PARTICLES,
                        particle_volume: lab::CASE2_TABULATED_PARTICLE_VOLUME,
                        outer_dt: lab::CASE2_OUTER_DT,
                        inner_substeps: lab::CASE2_SUBSTEPS,
                        export_every: 40,
                        export_components: vec!["S_ch4".into(), "S_ac".into(), "S_gas_ch4".into()],
                        export_format: FileFormat::Csv,
                    }),
                    integrator: IntegratorSection::default(),
                    solver: NewtonConfig::default(),
                    paths: Paths::default(),
                }
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::from(e).in_file(path))?;
        toml::from_str(&text).map_err(|e| CliError::from(e).in_file(path))
    }

    /// TOML with a unit legend on top.
    pub fn to_toml(&self) -> String {
        let body = toml::to_string(self).expect("run configuration serializes");
        format!(
            "# chad run configuration\n\
             # units: volumes m3, flows m3/d, k_p m3 d-1 bar-1, temperature K, p_atm bar,\n\
             # duration_days and record_interval_days in d, field duration and outer_dt in s,\n\
             # integrator.dt in s (tank runs; field runs step at outer_dt / inner_substeps)\n\n{body}"
        )
    }

    pub fn cstr(&self) -> Result<&CstrSection, CliError> {
        self.cstr
            .as_ref()
            .ok_or_else(|| CliError::config("configuration has no [cstr] section"))
    }

    pub fn field(&self) -> Result<&FieldSection, CliError> {
        self.field
            .as_ref()
            .ok_or_else(|| CliError::config("configuration has no [field] section"))
    }

    /// Numeric and path checks shared by all commands.
    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.conditions;
        if !(c.temperature > 0.0 && c.temperature.is_finite()) {
            return Err(CliError::config(format!("temperature = {}", c.temperature)));
        }
        if !(c.p_atm > 0.0 && c.p_atm.is_finite()) {
            return Err(CliError::config(format!("p_atm = {}", c.p_atm)));
        }
        if self.workers == Some(0) {
            return Err(CliError::config("workers must be >= 1"));
        }
        self.solver.validate()?;
        let p = &self.paths;
        for path in [&p.params, &p.initial_state, &p.inflow, &p.snapshots].into_iter().flatten() {
            if !path.exists() {
                return Err(CliError::config(format!("{} does not exist", path.display())));
            }
        }
        match self.case {
            Case::Cstr => {
                let s = self.cstr()?;
                if !(s.duration_days >= 0.0 && s.duration_days.is_finite()) {
                    return Err(CliError::config(format!("duration_days = {}", s.duration_days)));
                }
                if !(s.record_interval_days > 0.0) {
                    return Err(CliError::config(format!(
                        "record_interval_days = {}",
                        s.record_interval_days
                    )));
                }
                self.integrator_config().validate()?;
            }
            Case::Field => {
                let f = self.field()?;
                self.policy()?.validate()?;
                for name in &f.export_components {
                    name.parse::<chad_core::Component>()?;
                }
                if !(f.duration >= 0.0) {
                    return Err(CliError::config(format!("field duration = {}", f.duration)));
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<AdmParams, CliError> {
        let set = match &self.paths.params {
            Some(p) => ParamSet::load(p).map_err(|e| CliError::from(e).in_file(p))?,
            None => ParamSet::default(),
        };
        Ok(AdmParams::new(
            set,
            self.conditions.temperature,
            self.conditions.p_atm,
        )?)
    }

    fn state_file(path: &Option<PathBuf>, default: fn() -> AdmState) -> Result<AdmState, CliError> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::from(e).in_file(p))?;
                AdmState::parse(&text).map_err(|e| CliError::from(e).in_file(p))
            }
            None => Ok(default()),
        }
    }

    pub fn initial_state(&self) -> Result<AdmState, CliError> {
        Self::state_file(&self.paths.initial_state, tank::bsm2_initial_state)
    }

    pub fn inflow(&self) -> Result<AdmState, CliError> {
        Self::state_file(&self.paths.inflow, tank::bsm2_inflow)
    }

    pub fn integrator_config(&self) -> chad_core::IntegratorConfig {
        chad_core::IntegratorConfig {
            scheme: self.integrator.scheme,
            dt_inner: self.integrator.dt,
            substeps_per_outer: 1,
        }
    }

    pub fn reactor_config(&self) -> Result<ReactorConfig, CliError> {
        let s = self.cstr()?;
        Ok(ReactorConfig {
            v_liq: s.v_liq,
            v_gas: s.v_gas,
            q_in: s.q_in,
            q_out: s.q_out,
            k_p: s.k_p,
            inflow: self.inflow()?,
        })
    }

    pub fn policy(&self) -> Result<SyncPolicy, CliError> {
        let f = self.field()?;
        Ok(SyncPolicy {
            outer_dt: f.outer_dt,
            inner_substeps: f.inner_substeps,
        })
    }

    pub fn field_config(&self) -> Result<FieldConfig, CliError> {
        let f = self.field()?;
        Ok(FieldConfig {
            v_tank: f.v_tank,
            v_gas: f.v_gas,
            k_p: f.k_p,
            params: self.params()?,
            newton: self.solver,
            scheme: self.integrator.scheme,
        })
    }

    pub fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(chad_field::engine::physical_cores)
    }
}
