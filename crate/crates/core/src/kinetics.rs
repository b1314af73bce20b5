//! Biochemical process rates, liquid-gas transfer, headspace balance and
//! acid-base kinetics of a single reactor state.

use crate::error::KineticsError;
use crate::inhibition::{inhibition_factors, Uptake};
use crate::params::AdmParams;
use crate::state::{AdmState, Component, N_LIQUID, N_STATES};
use crate::stoichiometry::{Process, N_PROCESSES};

use Component::*;

/// Process rates, kgCOD m⁻³ d⁻¹ (kmol m⁻³ d⁻¹ for the CO2 transfer).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProcessRates {
    pub rho: [f64; N_PROCESSES],
    /// Liquid to gas transfer of H2, CH4 and CO2.
    pub transfer: [f64; 3],
}

impl ProcessRates {
    #[inline]
    pub fn get(&self, p: Process) -> f64 {
        self.rho[p.index()]
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = *self;
        out.rho.iter_mut().for_each(|r| *r *= k);
        out.transfer.iter_mut().for_each(|r| *r *= k);
        out
    }
}

/// Headspace partial pressures, bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasPressures {
    pub h2: f64,
    pub ch4: f64,
    pub co2: f64,
    pub total: f64,
}

pub fn gas_pressures(state: &AdmState, p: &AdmParams) -> GasPressures {
    let h2 = state[SGasH2] * p.rt / 16.0;
    let ch4 = state[SGasCh4] * p.rt / 64.0;
    let co2 = state[SGasCo2] * p.rt;
    GasPressures {
        h2,
        ch4,
        co2,
        total: h2 + ch4 + co2 + p.p_h2o,
    }
}

/// Reject concentrations below `-tolerance`.
pub fn check_state(state: &AdmState, tolerance: f64) -> Result<(), KineticsError> {
    for (i, &v) in state.values().iter().enumerate() {
        // also catches NaN
        if !(v >= -tolerance) {
            return Err(KineticsError::InvalidState {
                component: Component::ALL[i],
                value: v,
                tolerance,
            });
        }
    }
    Ok(())
}

#[inline]
fn monod(s: f64, k: f64) -> f64 {
    s / (k + s)
}

/// Uptake rate of hydrogen and its derivative with respect to S_h2, used by
/// the algebraic hydrogen solve.
#[inline]
pub(crate) fn hydrogen_uptake(s_h2: f64, x_h2: f64, inhibition: f64, p: &AdmParams) -> (f64, f64) {
    let k = p.set.k_s_h2;
    let v = p.set.k_m_h2 * x_h2 * inhibition;
    (v * s_h2 / (k + s_h2), v * k / ((k + s_h2) * (k + s_h2)))
}

/// All 19 biochemical rates and the three gas transfer rates. Negative
/// concentrations within `params.negative_tolerance` are read as zero;
/// anything lower is an invalid state.
pub fn process_rates(state: &AdmState, params: &AdmParams) -> Result<ProcessRates, KineticsError> {
    check_state(state, params.negative_tolerance)?;
    Ok(process_rates_unchecked(state, params))
}

#[inline]
pub(crate) fn process_rates_unchecked(state: &AdmState, params: &AdmParams) -> ProcessRates {
    let s = &params.set;
    let c = |k: Component| state[k].max(0.0);

    let i_su = inhibition_factors(Uptake::Sugars, state, params).product();
    let i_fa = inhibition_factors(Uptake::FattyAcids, state, params).product();
    let i_c4 = inhibition_factors(Uptake::Butyrate, state, params).product();
    let i_pro = inhibition_factors(Uptake::Propionate, state, params).product();
    let i_ac = inhibition_factors(Uptake::Acetate, state, params).product();
    let i_h2 = inhibition_factors(Uptake::Hydrogen, state, params).product();

    let (s_va, s_bu) = (c(SVa), c(SBu));
    let c4_total = s_va + s_bu + s.c4_competition_eps;

    let mut rho = [0.0; N_PROCESSES];
    rho[0] = s.k_dis * c(Xc);
    rho[1] = s.k_hyd_ch * c(XCh);
    rho[2] = s.k_hyd_pr * c(XPr);
    rho[3] = s.k_hyd_li * c(XLi);
    rho[4] = s.k_m_su * monod(c(SSu), s.k_s_su) * c(XSu) * i_su;
    rho[5] = s.k_m_aa * monod(c(SAa), s.k_s_aa) * c(XAa) * i_su;
    rho[6] = s.k_m_fa * monod(c(SFa), s.k_s_fa) * c(XFa) * i_fa;
    rho[7] = s.k_m_c4 * monod(s_va, s.k_s_c4) * c(XC4) * (s_va / c4_total) * i_c4;
    rho[8] = s.k_m_c4 * monod(s_bu, s.k_s_c4) * c(XC4) * (s_bu / c4_total) * i_c4;
    rho[9] = s.k_m_pro * monod(c(SPro), s.k_s_pro) * c(XPro) * i_pro;
    rho[10] = s.k_m_ac * monod(c(SAc), s.k_s_ac) * c(XAc) * i_ac;
    rho[11] = hydrogen_uptake(c(SH2), c(XH2), i_h2, params).0;
    rho[12] = s.k_dec_su * c(XSu);
    rho[13] = s.k_dec_aa * c(XAa);
    rho[14] = s.k_dec_fa * c(XFa);
    rho[15] = s.k_dec_c4 * c(XC4);
    rho[16] = s.k_dec_pro * c(XPro);
    rho[17] = s.k_dec_ac * c(XAc);
    rho[18] = s.k_dec_h2 * c(XH2);

    ProcessRates {
        rho,
        transfer: gas_transfer(state, params),
    }
}

/// `k_L a (S_liq - K_H p_gas)` for H2, CH4 (COD basis) and CO2.
#[inline]
pub fn gas_transfer(state: &AdmState, p: &AdmParams) -> [f64; 3] {
    let gp = gas_pressures(state, p);
    let s_co2 = state[SIc].max(0.0) - state[SHco3Ion].max(0.0);
    [
        p.set.k_la * (state[SH2].max(0.0) - 16.0 * p.kh_h2 * gp.h2),
        p.set.k_la * (state[SCh4].max(0.0) - 64.0 * p.kh_ch4 * gp.ch4),
        p.set.k_la * (s_co2 - p.kh_co2 * gp.co2),
    ]
}

/// Reaction contribution `sum_j rho_j nu_ij` for the liquid components.
/// Gas transfer and acid-base terms are not included.
pub fn stoichiometric_rhs(rates: &ProcessRates, params: &AdmParams) -> [f64; N_LIQUID] {
    let mut out = [0.0; N_LIQUID];
    params.stoich.apply(&rates.rho, &mut out);
    out
}

/// Volumetric description of the headspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Headspace {
    /// V_liq / V_gas.
    pub liquid_to_gas: f64,
    /// Outlet conductance per unit gas volume, k_p / V_gas, d⁻¹ bar⁻¹.
    pub conductance_per_volume: f64,
    /// V_gas, m³. Only used to report q_gas.
    pub v_gas: f64,
}

impl Headspace {
    pub fn new(v_liq: f64, v_gas: f64, k_p: f64) -> Self {
        Self {
            liquid_to_gas: v_liq / v_gas,
            conductance_per_volume: k_p / v_gas,
            v_gas,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasPhaseRhs {
    /// d/dt of S_gas_h2, S_gas_ch4, S_gas_co2.
    pub derivative: [f64; 3],
    /// Total gas outflow, m³/d.
    pub q_gas: f64,
}

/// Gas outflow per unit gas volume, `k_p (P - P_atm) P / P_atm / V_gas`,
/// clamped at zero when the headspace is not above atmospheric pressure.
#[inline]
fn specific_gas_outflow(state: &AdmState, p: &AdmParams, hs: &Headspace) -> f64 {
    let total = gas_pressures(state, p).total;
    if total <= p.p_atm {
        0.0
    } else {
        hs.conductance_per_volume * (total - p.p_atm) * total / p.p_atm
    }
}

/// Headspace balance: transfer scaled by V_liq/V_gas, minus dilution by the
/// gas outflow.
pub fn gas_phase_rhs(
    state: &AdmState,
    rates: &ProcessRates,
    params: &AdmParams,
    headspace: &Headspace,
) -> GasPhaseRhs {
    let d = specific_gas_outflow(state, params, headspace);
    let mut derivative = [0.0; 3];
    for (k, comp) in Component::GASES.iter().enumerate() {
        derivative[k] = -d * state[*comp] + rates.transfer[k] * headspace.liquid_to_gas;
    }
    GasPhaseRhs {
        derivative,
        q_gas: d * headspace.v_gas,
    }
}

/// Acid-base rates of the six ion states, in state order
/// (va⁻, bu⁻, pro⁻, ac⁻, HCO3⁻, NH3). Only used when the ion states are
/// integrated instead of solved algebraically.
pub fn acid_base_rates(state: &AdmState, p: &AdmParams) -> [f64; 6] {
    let h = state.s_h();
    let kab = p.set.k_ab;
    let r = |ion: Component, total: Component, ka: f64| {
        kab * (state[ion] * (ka + h) - ka * state[total])
    };
    [
        r(SVaIon, SVa, p.ka_va),
        r(SBuIon, SBu, p.ka_bu),
        r(SProIon, SPro, p.ka_pro),
        r(SAcIon, SAc, p.ka_ac),
        r(SHco3Ion, SIc, p.ka_co2),
        r(SNh3, SIn, p.ka_in),
    ]
}

/// Full reaction-plus-transfer source term for every state, without the
/// hydraulic terms. Ion-state entries hold the acid-base kinetics.
pub fn reaction_terms(
    state: &AdmState,
    rates: &ProcessRates,
    params: &AdmParams,
    headspace: &Headspace,
) -> ([f64; N_STATES], f64) {
    let mut out = [0.0; N_STATES];
    let liquid = stoichiometric_rhs(rates, params);
    out[..N_LIQUID].copy_from_slice(&liquid);
    out[SH2.index()] -= rates.transfer[0];
    out[SCh4.index()] -= rates.transfer[1];
    out[SIc.index()] -= rates.transfer[2];
    let ab = acid_base_rates(state, params);
    for (k, ion) in Component::IONS.iter().enumerate() {
        out[ion.index()] = -ab[k];
    }
    let gas = gas_phase_rhs(state, rates, params, headspace);
    for (k, comp) in Component::GASES.iter().enumerate() {
        out[comp.index()] = gas.derivative[k];
    }
    (out, gas.q_gas)
}
