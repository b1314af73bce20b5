//! The 35-component ADM1 state vector.
//!
//! Components are stored in the canonical BSM2 order: 12 soluble, 12
//! particulate, cation/anion, six ion states and three headspace gases. The
//! proton concentration is carried alongside as a derived quantity and doubles
//! as the warm start of the next charge-balance solve.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use crate::error::ConfigError;

/// Number of integrated state components.
pub const N_STATES: usize = 35;

/// Number of liquid components that take part in the inflow/outflow balance.
pub const N_LIQUID: usize = 26;

/// Proton concentration of neutral water at 25 °C, kmol/m³.
pub const NEUTRAL_PROTON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(usize)]
pub enum Component {
    SSu = 0,
    SAa,
    SFa,
    SVa,
    SBu,
    SPro,
    SAc,
    SH2,
    SCh4,
    SIc,
    SIn,
    SI,
    Xc,
    XCh,
    XPr,
    XLi,
    XSu,
    XAa,
    XFa,
    XC4,
    XPro,
    XAc,
    XH2,
    XI,
    SCat,
    SAn,
    SVaIon,
    SBuIon,
    SProIon,
    SAcIon,
    SHco3Ion,
    SNh3,
    SGasH2,
    SGasCh4,
    SGasCo2,
}

use Component::*;

impl Component {
    pub const ALL: [Component; N_STATES] = [
        SSu, SAa, SFa, SVa, SBu, SPro, SAc, SH2, SCh4, SIc, SIn, SI, Xc, XCh, XPr, XLi, XSu, XAa,
        XFa, XC4, XPro, XAc, XH2, XI, SCat, SAn, SVaIon, SBuIon, SProIon, SAcIon, SHco3Ion, SNh3,
        SGasH2, SGasCh4, SGasCo2,
    ];

    /// The six acid-base ion states.
    pub const IONS: [Component; 6] = [SVaIon, SBuIon, SProIon, SAcIon, SHco3Ion, SNh3];

    pub const GASES: [Component; 3] = [SGasH2, SGasCh4, SGasCo2];

    /// Canonical column names, in state order.
    pub const NAMES: [&'static str; N_STATES] = [
        "S_su", "S_aa", "S_fa", "S_va", "S_bu", "S_pro", "S_ac", "S_h2", "S_ch4", "S_IC", "S_IN",
        "S_I", "X_c", "X_ch", "X_pr", "X_li", "X_su", "X_aa", "X_fa", "X_c4", "X_pro", "X_ac",
        "X_h2", "X_I", "S_cat", "S_an", "S_va_ion", "S_bu_ion", "S_pro_ion", "S_ac_ion",
        "S_hco3_ion", "S_nh3", "S_gas_h2", "S_gas_ch4", "S_gas_co2",
    ];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        Self::NAMES[self.index()]
    }

    /// Liquid components take part in the hydraulic balance.
    pub fn is_liquid(self) -> bool {
        self.index() < N_LIQUID
    }

    /// Components measured on a COD basis (everything organic except the
    /// inorganic carbon and nitrogen pools).
    pub fn is_cod(self) -> bool {
        matches!(self.index(), 0..=8 | 11..=23)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Component {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(i) = Self::NAMES.iter().position(|n| *n == s) {
            return Ok(Self::ALL[i]);
        }
        // short names used in plots and tables
        match s {
            "G_ch4" => Ok(SGasCh4),
            "G_h2" => Ok(SGasH2),
            "G_co2" => Ok(SGasCo2),
            "X_xc" => Ok(Xc),
            "S_cation" => Ok(SCat),
            "S_anion" => Ok(SAn),
            _ => Err(ConfigError::UnknownComponent(s.to_string())),
        }
    }
}

/// State of one reactor or AD particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmState {
    values: [f64; N_STATES],
    /// Proton concentration, kmol/m³. Derived from the charge balance.
    s_h: f64,
}

impl Default for AdmState {
    fn default() -> Self {
        Self::zero()
    }
}

impl AdmState {
    /// All concentrations zero, proton at neutral water.
    pub fn zero() -> Self {
        Self {
            values: [0.0; N_STATES],
            s_h: NEUTRAL_PROTON,
        }
    }

    pub fn from_values(values: [f64; N_STATES], s_h: f64) -> Self {
        Self { values, s_h }
    }

    #[inline]
    pub fn values(&self) -> &[f64; N_STATES] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64; N_STATES] {
        &mut self.values
    }

    #[inline]
    pub fn s_h(&self) -> f64 {
        self.s_h
    }

    #[inline]
    pub fn set_s_h(&mut self, s_h: f64) {
        self.s_h = s_h;
    }

    pub fn ph(&self) -> f64 {
        -self.s_h.log10()
    }

    /// Same state with only the liquid components kept; used for inflow
    /// compositions.
    pub fn liquid_only(&self) -> Self {
        let mut out = Self::zero();
        out.values[..N_LIQUID].copy_from_slice(&self.values[..N_LIQUID]);
        out
    }

    /// Parse a `name = value` state file. Unlisted components are zero; the
    /// optional `S_H` (or `pH`) key seeds the proton concentration.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: HashMap<String, f64> = toml::from_str(text)?;
        let mut state = Self::zero();
        for (key, value) in table {
            if !value.is_finite() {
                return Err(ConfigError::Invalid(format!("{key} = {value} is not finite")));
            }
            match key.as_str() {
                "S_H" => state.s_h = value,
                "pH" => state.s_h = 10f64.powf(-value),
                name => state[name.parse::<Component>()?] = value,
            }
        }
        if state.s_h <= 0.0 {
            return Err(ConfigError::Invalid("S_H must be positive".into()));
        }
        Ok(state)
    }

    /// Emit in the same `name = value` format accepted by [`AdmState::parse`].
    pub fn to_state_file(&self) -> String {
        let mut out = String::new();
        for c in Component::ALL {
            out.push_str(&format!("{} = {:e}\n", c.name(), self[c]));
        }
        out.push_str(&format!("S_H = {:e}\n", self.s_h));
        out
    }
}

impl Index<Component> for AdmState {
    type Output = f64;

    #[inline]
    fn index(&self, c: Component) -> &f64 {
        &self.values[c as usize]
    }
}

impl IndexMut<Component> for AdmState {
    #[inline]
    fn index_mut(&mut self, c: Component) -> &mut f64 {
        &mut self.values[c as usize]
    }
}
