//! Kinetic, stoichiometric and physico-chemical constants.
//!
//! [`ParamSet`] is the raw content of a parameter file, with equilibrium
//! constants at the reference temperature. [`AdmParams`] is the immutable,
//! temperature-corrected set the kinetics read from.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::inhibition::HillSwitch;
use crate::stoichiometry::Stoichiometry;

/// Embedded default parameter file.
pub const DEFAULT_PARAMS: &str = include_str!("../data/adm1_default.params");

/// Version of the parameter file layout understood by this build.
pub const PARAM_VERSION: u32 = 1;

/// `100 * R` in J/(mol K) when `R` is given in bar m³/(kmol K).
const J_PER_BAR_M3: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HillForm {
    /// `K^n / (S_H^n + K^n)` with `K = 10^-(pH_LL + pH_UL)/2`.
    #[default]
    Proton,
    /// `pH^n / (pH^n + K_pH^n)` with `K_pH = (pH_LL + pH_UL)/2`.
    Ph,
}

/// Raw parameter file content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    pub param_version: u32,

    pub f_si_xc: f64,
    pub f_xi_xc: f64,
    pub f_ch_xc: f64,
    pub f_pr_xc: f64,
    pub f_li_xc: f64,

    pub n_xc: f64,
    pub n_i: f64,
    pub n_aa: f64,
    pub n_bac: f64,

    pub c_xc: f64,
    pub c_si: f64,
    pub c_ch: f64,
    pub c_pr: f64,
    pub c_li: f64,
    pub c_xi: f64,
    pub c_su: f64,
    pub c_aa: f64,
    pub c_fa: f64,
    pub c_bu: f64,
    pub c_pro: f64,
    pub c_ac: f64,
    pub c_bac: f64,
    pub c_va: f64,
    pub c_ch4: f64,

    pub f_fa_li: f64,
    pub f_h2_su: f64,
    pub f_bu_su: f64,
    pub f_pro_su: f64,
    pub f_ac_su: f64,
    pub f_h2_aa: f64,
    pub f_va_aa: f64,
    pub f_bu_aa: f64,
    pub f_pro_aa: f64,
    pub f_ac_aa: f64,
    pub f_ac_fa: f64,
    pub f_h2_fa: f64,
    pub f_pro_va: f64,
    pub f_ac_va: f64,
    pub f_h2_va: f64,
    pub f_ac_bu: f64,
    pub f_h2_bu: f64,
    pub f_ac_pro: f64,
    pub f_h2_pro: f64,

    pub y_su: f64,
    pub y_aa: f64,
    pub y_fa: f64,
    pub y_c4: f64,
    pub y_pro: f64,
    pub y_ac: f64,
    pub y_h2: f64,

    pub k_dis: f64,
    pub k_hyd_ch: f64,
    pub k_hyd_pr: f64,
    pub k_hyd_li: f64,

    pub k_m_su: f64,
    pub k_s_su: f64,
    pub k_m_aa: f64,
    pub k_s_aa: f64,
    pub k_m_fa: f64,
    pub k_s_fa: f64,
    pub k_m_c4: f64,
    pub k_s_c4: f64,
    pub k_m_pro: f64,
    pub k_s_pro: f64,
    pub k_m_ac: f64,
    pub k_s_ac: f64,
    pub k_m_h2: f64,
    pub k_s_h2: f64,
    pub c4_competition_eps: f64,

    pub k_dec_su: f64,
    pub k_dec_aa: f64,
    pub k_dec_fa: f64,
    pub k_dec_c4: f64,
    pub k_dec_pro: f64,
    pub k_dec_ac: f64,
    pub k_dec_h2: f64,

    pub hill_form: HillForm,
    pub ph_ll_aa: f64,
    pub ph_ul_aa: f64,
    pub ph_ll_ac: f64,
    pub ph_ul_ac: f64,
    pub ph_ll_h2: f64,
    pub ph_ul_h2: f64,
    pub hill_n_aa: f64,
    pub hill_n_ac: f64,
    pub hill_n_h2: f64,
    pub k_s_in: f64,
    pub k_i_h2_fa: f64,
    pub k_i_h2_c4: f64,
    pub k_i_h2_pro: f64,
    pub k_i_nh3: f64,

    pub r_gas: f64,
    pub t_ref: f64,
    pub kw_ref: f64,
    pub kw_dh: f64,
    pub ka_va_ref: f64,
    pub ka_va_dh: f64,
    pub ka_bu_ref: f64,
    pub ka_bu_dh: f64,
    pub ka_pro_ref: f64,
    pub ka_pro_dh: f64,
    pub ka_ac_ref: f64,
    pub ka_ac_dh: f64,
    pub ka_co2_ref: f64,
    pub ka_co2_dh: f64,
    pub ka_in_ref: f64,
    pub ka_in_dh: f64,
    pub kh_h2_ref: f64,
    pub kh_h2_dh: f64,
    pub kh_ch4_ref: f64,
    pub kh_ch4_dh: f64,
    pub kh_co2_ref: f64,
    pub kh_co2_dh: f64,
    pub p_h2o_ref: f64,
    pub p_h2o_dh: f64,
    pub k_ab: f64,
    pub k_la: f64,
}

impl Default for ParamSet {
    fn default() -> Self {
        Self::parse(DEFAULT_PARAMS).expect("embedded parameter file is valid")
    }
}

impl ParamSet {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let set: ParamSet = toml::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_params_file(&self) -> String {
        toml::to_string(self).expect("flat table serializes")
    }

    fn positive(&self) -> [(&'static str, f64); 37] {
        [
            ("k_dis", self.k_dis),
            ("k_hyd_ch", self.k_hyd_ch),
            ("k_hyd_pr", self.k_hyd_pr),
            ("k_hyd_li", self.k_hyd_li),
            ("k_m_su", self.k_m_su),
            ("k_s_su", self.k_s_su),
            ("k_m_aa", self.k_m_aa),
            ("k_s_aa", self.k_s_aa),
            ("k_m_fa", self.k_m_fa),
            ("k_s_fa", self.k_s_fa),
            ("k_m_c4", self.k_m_c4),
            ("k_s_c4", self.k_s_c4),
            ("k_m_pro", self.k_m_pro),
            ("k_s_pro", self.k_s_pro),
            ("k_m_ac", self.k_m_ac),
            ("k_s_ac", self.k_s_ac),
            ("k_m_h2", self.k_m_h2),
            ("k_s_h2", self.k_s_h2),
            ("hill_n_aa", self.hill_n_aa),
            ("hill_n_ac", self.hill_n_ac),
            ("hill_n_h2", self.hill_n_h2),
            ("k_s_in", self.k_s_in),
            ("k_i_h2_fa", self.k_i_h2_fa),
            ("k_i_h2_c4", self.k_i_h2_c4),
            ("k_i_h2_pro", self.k_i_h2_pro),
            ("k_i_nh3", self.k_i_nh3),
            ("r_gas", self.r_gas),
            ("t_ref", self.t_ref),
            ("kw_ref", self.kw_ref),
            ("ka_va_ref", self.ka_va_ref),
            ("ka_bu_ref", self.ka_bu_ref),
            ("ka_pro_ref", self.ka_pro_ref),
            ("ka_ac_ref", self.ka_ac_ref),
            ("ka_co2_ref", self.ka_co2_ref),
            ("ka_in_ref", self.ka_in_ref),
            ("k_ab", self.k_ab),
            ("k_la", self.k_la),
        ]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.param_version != PARAM_VERSION {
            return Err(ConfigError::Invalid(format!(
                "parameter file version {} (expected {PARAM_VERSION})",
                self.param_version
            )));
        }
        for (name, v) in self.positive() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("{name} = {v} must be > 0")));
            }
        }
        for (name, v) in [
            ("kh_h2_ref", self.kh_h2_ref),
            ("kh_ch4_ref", self.kh_ch4_ref),
            ("kh_co2_ref", self.kh_co2_ref),
            ("p_h2o_ref", self.p_h2o_ref),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("{name} = {v} must be > 0")));
            }
        }
        for (g, ll, ul) in [
            ("aa", self.ph_ll_aa, self.ph_ul_aa),
            ("ac", self.ph_ll_ac, self.ph_ul_ac),
            ("h2", self.ph_ll_h2, self.ph_ul_h2),
        ] {
            if !(ll < ul) || ll <= 0.0 {
                return Err(ConfigError::Invalid(format!(
                    "pH limits for {g}: need 0 < ph_ll ({ll}) < ph_ul ({ul})"
                )));
            }
        }
        Ok(())
    }
}

/// A constant that follows the van 't Hoff relation
/// `K(T) = K_ref exp(dH / (100 R) (1/T_ref - 1/T))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VantHoff {
    pub k_ref: f64,
    /// Enthalpy, J/mol.
    pub dh: f64,
}

impl VantHoff {
    pub fn new(k_ref: f64, dh: f64) -> Self {
        Self { k_ref, dh }
    }

    pub fn at(&self, temperature: f64, t_ref: f64, r_gas: f64) -> f64 {
        if temperature == t_ref || self.dh == 0.0 {
            return self.k_ref;
        }
        self.k_ref * (self.dh / (J_PER_BAR_M3 * r_gas) * (1.0 / t_ref - 1.0 / temperature)).exp()
    }
}

/// Temperature-corrected parameter set. Immutable once built; shared
/// read-only across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmParams {
    pub set: ParamSet,
    /// Operating temperature, K.
    pub temperature: f64,
    /// Atmospheric pressure, bar.
    pub p_atm: f64,
    /// `R T`, bar m³/kmol.
    pub rt: f64,
    pub kw: f64,
    pub ka_va: f64,
    pub ka_bu: f64,
    pub ka_pro: f64,
    pub ka_ac: f64,
    pub ka_co2: f64,
    pub ka_in: f64,
    pub kh_h2: f64,
    pub kh_ch4: f64,
    pub kh_co2: f64,
    pub p_h2o: f64,
    pub hill_aa: HillSwitch,
    pub hill_ac: HillSwitch,
    pub hill_h2: HillSwitch,
    pub stoich: Stoichiometry,
    /// Negatives above `-negative_tolerance` are read as zero.
    pub negative_tolerance: f64,
}

impl AdmParams {
    pub fn new(set: ParamSet, temperature: f64, p_atm: f64) -> Result<Self, ConfigError> {
        set.validate()?;
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(ConfigError::Invalid(format!("temperature {temperature} K")));
        }
        if !(p_atm > 0.0 && p_atm.is_finite()) {
            return Err(ConfigError::Invalid(format!("p_atm {p_atm} bar")));
        }
        let at = |k: f64, dh: f64| VantHoff::new(k, dh).at(temperature, set.t_ref, set.r_gas);
        let hill = |ll, ul, n| HillSwitch::new(ll, ul, n, set.hill_form);
        Ok(Self {
            temperature,
            p_atm,
            rt: set.r_gas * temperature,
            kw: at(set.kw_ref, set.kw_dh),
            ka_va: at(set.ka_va_ref, set.ka_va_dh),
            ka_bu: at(set.ka_bu_ref, set.ka_bu_dh),
            ka_pro: at(set.ka_pro_ref, set.ka_pro_dh),
            ka_ac: at(set.ka_ac_ref, set.ka_ac_dh),
            ka_co2: at(set.ka_co2_ref, set.ka_co2_dh),
            ka_in: at(set.ka_in_ref, set.ka_in_dh),
            kh_h2: at(set.kh_h2_ref, set.kh_h2_dh),
            kh_ch4: at(set.kh_ch4_ref, set.kh_ch4_dh),
            kh_co2: at(set.kh_co2_ref, set.kh_co2_dh),
            p_h2o: at(set.p_h2o_ref, set.p_h2o_dh),
            hill_aa: hill(set.ph_ll_aa, set.ph_ul_aa, set.hill_n_aa),
            hill_ac: hill(set.ph_ll_ac, set.ph_ul_ac, set.hill_n_ac),
            hill_h2: hill(set.ph_ll_h2, set.ph_ul_h2, set.hill_n_h2),
            stoich: Stoichiometry::new(&set),
            negative_tolerance: 1e-12,
            set,
        })
    }

    /// Default parameter file at the given operating point.
    pub fn default_at(temperature: f64, p_atm: f64) -> Self {
        Self::new(ParamSet::default(), temperature, p_atm).expect("default parameters are valid")
    }

    pub fn with_hill_form(mut self, form: HillForm) -> Self {
        self.set.hill_form = form;
        for h in [&mut self.hill_aa, &mut self.hill_ac, &mut self.hill_h2] {
            *h = HillSwitch::new(h.ph_ll, h.ph_ul, h.n, form);
        }
        self
    }

    pub fn with_negative_tolerance(mut self, tol: f64) -> Self {
        self.negative_tolerance = tol;
        self
    }
}
