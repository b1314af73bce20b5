//! Inhibition factors: the Hill pH switch, non-competitive inhibition and
//! substrate limitation, and their per-uptake combination.

use crate::error::KineticsError;
use crate::params::{AdmParams, HillForm};
use crate::state::{AdmState, Component};

fn check_constant(name: &'static str, k: f64) -> Result<(), KineticsError> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(KineticsError::Domain {
            name,
            value: k,
            why: "constant must be positive",
        })
    }
}

fn check_limits(ph_ll: f64, ph_ul: f64, n: f64) -> Result<(), KineticsError> {
    if !(ph_ll < ph_ul) {
        return Err(KineticsError::Domain {
            name: "pH_LL",
            value: ph_ll,
            why: "lower limit must be below upper limit",
        });
    }
    check_constant("n", n)
}

/// Hill pH inhibition written in pH: `pH^n / (pH^n + K_pH^n)` with
/// `K_pH = (pH_LL + pH_UL) / 2`.
pub fn hill_inhibition(ph: f64, ph_ll: f64, ph_ul: f64, n: f64) -> Result<f64, KineticsError> {
    check_limits(ph_ll, ph_ul, n)?;
    if !(ph > 0.0) {
        return Err(KineticsError::Domain {
            name: "pH",
            value: ph,
            why: "pH must be positive",
        });
    }
    let k_ph = 0.5 * (ph_ll + ph_ul);
    // (pH/K)^n form keeps the half point exact and avoids overflow at large n.
    let r = (k_ph / ph).powf(n);
    Ok(1.0 / (1.0 + r))
}

/// Hill pH inhibition written in the proton concentration:
/// `K^n / (S_H^n + K^n)` with `K = 10^-(pH_LL + pH_UL)/2`.
pub fn hill_inhibition_proton(
    s_h: f64,
    ph_ll: f64,
    ph_ul: f64,
    n: f64,
) -> Result<f64, KineticsError> {
    check_limits(ph_ll, ph_ul, n)?;
    if !(s_h > 0.0) {
        return Err(KineticsError::Domain {
            name: "S_H",
            value: s_h,
            why: "proton concentration must be positive",
        });
    }
    let k = 10f64.powf(-0.5 * (ph_ll + ph_ul));
    Ok(1.0 / (1.0 + (s_h / k).powf(n)))
}

/// `1 / (1 + S_I / K_I)`.
pub fn noncompetitive_inhibition(s_i: f64, k_i: f64) -> Result<f64, KineticsError> {
    check_constant("K_I", k_i)?;
    Ok(k_i / (k_i + s_i))
}

/// `S_I / (S_I + K_I)`.
pub fn substrate_limitation(s_i: f64, k_i: f64) -> Result<f64, KineticsError> {
    check_constant("K_I", k_i)?;
    Ok(s_i / (s_i + k_i))
}

/// Precomputed Hill switch for one trophic group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillSwitch {
    pub ph_ll: f64,
    pub ph_ul: f64,
    pub n: f64,
    pub form: HillForm,
    /// Midpoint pH, `(pH_LL + pH_UL) / 2`.
    k_ph: f64,
    /// Midpoint proton concentration, `10^-k_ph`.
    k_h: f64,
    n_int: Option<i32>,
}

impl HillSwitch {
    pub fn new(ph_ll: f64, ph_ul: f64, n: f64, form: HillForm) -> Self {
        let k_ph = 0.5 * (ph_ll + ph_ul);
        let n_int = (n.fract() == 0.0 && n.abs() < 64.0).then_some(n as i32);
        Self {
            ph_ll,
            ph_ul,
            n,
            form,
            k_ph,
            k_h: 10f64.powf(-k_ph),
            n_int,
        }
    }

    #[inline]
    fn pow(&self, x: f64) -> f64 {
        match self.n_int {
            Some(n) => x.powi(n),
            None => x.powf(self.n),
        }
    }

    pub fn midpoint_ph(&self) -> f64 {
        self.k_ph
    }

    /// Inhibition factor for the proton concentration `s_h` (> 0).
    #[inline]
    pub fn factor(&self, s_h: f64) -> f64 {
        match self.form {
            HillForm::Proton => 1.0 / (1.0 + self.pow(s_h / self.k_h)),
            HillForm::Ph => 1.0 / (1.0 + self.pow(self.k_ph / -s_h.log10())),
        }
    }
}

/// The eight substrate uptake processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Uptake {
    Sugars,
    AminoAcids,
    FattyAcids,
    Valerate,
    Butyrate,
    Propionate,
    Acetate,
    Hydrogen,
}

impl Uptake {
    pub const ALL: [Uptake; 8] = [
        Uptake::Sugars,
        Uptake::AminoAcids,
        Uptake::FattyAcids,
        Uptake::Valerate,
        Uptake::Butyrate,
        Uptake::Propionate,
        Uptake::Acetate,
        Uptake::Hydrogen,
    ];
}

/// Individual factors that make up the inhibition of one uptake process.
/// Factors that do not apply to the process are 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InhibitionFactors {
    pub ph: f64,
    pub nitrogen: f64,
    pub hydrogen: f64,
    pub ammonia: f64,
}

impl InhibitionFactors {
    pub fn product(&self) -> f64 {
        self.ph * self.nitrogen * self.hydrogen * self.ammonia
    }
}

/// Applicable inhibition factors for an uptake process at the given state.
/// Negative concentrations are read as zero.
pub fn inhibition_factors(group: Uptake, state: &AdmState, p: &AdmParams) -> InhibitionFactors {
    let s = &p.set;
    let s_in = state[Component::SIn].max(0.0);
    let s_h2 = state[Component::SH2].max(0.0);
    let s_nh3 = state[Component::SNh3].max(0.0);
    let nitrogen = s_in / (s_in + s.k_s_in);
    let h2 = |k: f64| k / (k + s_h2);
    let (ph, hydrogen, ammonia) = match group {
        Uptake::Sugars | Uptake::AminoAcids => (p.hill_aa.factor(state.s_h()), 1.0, 1.0),
        Uptake::FattyAcids => (p.hill_aa.factor(state.s_h()), h2(s.k_i_h2_fa), 1.0),
        Uptake::Valerate | Uptake::Butyrate => {
            (p.hill_aa.factor(state.s_h()), h2(s.k_i_h2_c4), 1.0)
        }
        Uptake::Propionate => (p.hill_aa.factor(state.s_h()), h2(s.k_i_h2_pro), 1.0),
        Uptake::Acetate => (
            p.hill_ac.factor(state.s_h()),
            1.0,
            s.k_i_nh3 / (s.k_i_nh3 + s_nh3),
        ),
        Uptake::Hydrogen => (p.hill_h2.factor(state.s_h()), 1.0, 1.0),
    };
    InhibitionFactors {
        ph,
        nitrogen,
        hydrogen,
        ammonia,
    }
}

/// Combined inhibition of an uptake process: pH switch, nitrogen limitation,
/// and where applicable hydrogen or free-ammonia inhibition.
pub fn total_inhibition(group: Uptake, state: &AdmState, p: &AdmParams) -> f64 {
    inhibition_factors(group, state, p).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamSet;

    #[test]
    fn hill_half_point_and_example() {
        assert_eq!(hill_inhibition(4.75, 4.0, 5.5, 3.0).unwrap(), 0.5);
        assert_eq!(hill_inhibition(4.75, 4.0, 5.5, 0.7).unwrap(), 0.5);
        // 7^3 / (7^3 + 4.75^3), evaluated at 30 digits
        let v = hill_inhibition(7.0, 4.0, 5.5, 3.0).unwrap();
        approx::assert_relative_eq!(v, 0.761_931_206_830_724_4, max_relative = 1e-14);
        assert_eq!(hill_inhibition_proton(10f64.powf(-4.75), 4.0, 5.5, 2.0).unwrap(), 0.5);
    }

    #[test]
    fn hill_domain_errors() {
        assert!(hill_inhibition(0.0, 4.0, 5.5, 3.0).is_err());
        assert!(hill_inhibition(-1.0, 4.0, 5.5, 3.0).is_err());
        assert!(hill_inhibition(7.0, 5.5, 4.0, 3.0).is_err());
        assert!(hill_inhibition(7.0, 4.0, 5.5, 0.0).is_err());
        assert!(hill_inhibition_proton(0.0, 4.0, 5.5, 3.0).is_err());
    }

    #[test]
    fn simple_factor_examples() {
        assert_eq!(noncompetitive_inhibition(0.0, 2.0).unwrap(), 1.0);
        assert_eq!(noncompetitive_inhibition(2.0, 2.0).unwrap(), 0.5);
        assert_eq!(noncompetitive_inhibition(6.0, 2.0).unwrap(), 0.25);
        assert_eq!(substrate_limitation(0.0, 2.0).unwrap(), 0.0);
        assert_eq!(substrate_limitation(2.0, 2.0).unwrap(), 0.5);
        assert_eq!(substrate_limitation(18.0, 2.0).unwrap(), 0.9);
        assert!(noncompetitive_inhibition(1.0, 0.0).is_err());
        assert!(substrate_limitation(1.0, -1.0).is_err());
    }

    #[test]
    fn switch_matches_free_functions() {
        for form in [HillForm::Proton, HillForm::Ph] {
            let sw = HillSwitch::new(6.0, 7.0, 3.0, form);
            for ph in [4.0, 6.3, 6.5, 7.1, 9.0] {
                let s_h = 10f64.powf(-ph);
                let expect = match form {
                    HillForm::Proton => hill_inhibition_proton(s_h, 6.0, 7.0, 3.0).unwrap(),
                    HillForm::Ph => hill_inhibition(ph, 6.0, 7.0, 3.0).unwrap(),
                };
                approx::assert_relative_eq!(sw.factor(s_h), expect, max_relative = 1e-12);
            }
        }
    }

    fn params() -> AdmParams {
        AdmParams::new(ParamSet::default(), 308.5, 1.013).unwrap()
    }

    #[test]
    fn total_inhibition_limits() {
        let p = params();
        let mut s = AdmState::zero();
        s[Component::SIn] = 1e3;
        s.set_s_h(1e-12);
        for g in Uptake::ALL {
            let v = total_inhibition(g, &s, &p);
            assert!(v > 0.999 && v <= 1.0, "{g:?}: {v}");
        }
        s[Component::SIn] = 0.0;
        for g in Uptake::ALL {
            assert_eq!(total_inhibition(g, &s, &p), 0.0);
        }
    }

    #[test]
    fn total_inhibition_is_product_of_factors() {
        let p = params();
        let mut s = AdmState::zero();
        s[Component::SIn] = 0.05;
        s[Component::SH2] = 4e-6;
        s[Component::SNh3] = 2e-3;
        s.set_s_h(10f64.powf(-6.4));
        let set = &p.set;
        let ph = |ll: f64, ul: f64, n: f64| hill_inhibition_proton(s.s_h(), ll, ul, n).unwrap();
        let nit = substrate_limitation(0.05, set.k_s_in).unwrap();
        let h2 = |k: f64| noncompetitive_inhibition(4e-6, k).unwrap();
        let expect = [
            (Uptake::Sugars, ph(4.0, 5.5, 2.0) * nit),
            (Uptake::FattyAcids, ph(4.0, 5.5, 2.0) * nit * h2(set.k_i_h2_fa)),
            (Uptake::Butyrate, ph(4.0, 5.5, 2.0) * nit * h2(set.k_i_h2_c4)),
            (Uptake::Propionate, ph(4.0, 5.5, 2.0) * nit * h2(set.k_i_h2_pro)),
            (
                Uptake::Acetate,
                ph(6.0, 7.0, 3.0) * nit * noncompetitive_inhibition(2e-3, set.k_i_nh3).unwrap(),
            ),
            (Uptake::Hydrogen, ph(5.0, 6.0, 3.0) * nit),
        ];
        for (g, e) in expect {
            approx::assert_relative_eq!(total_inhibition(g, &s, &p), e, max_relative = 1e-12);
        }
    }
}
