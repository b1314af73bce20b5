//! The 19-process stoichiometric matrix over the 26 liquid components.
//!
//! COD-basis coefficients come straight from the yields and product
//! fractions. The inorganic carbon and nitrogen columns are closures: they are
//! set so that each process conserves carbon and nitrogen given the per
//! component C and N contents.

use crate::params::ParamSet;
use crate::state::{Component, N_LIQUID};

use Component::*;

pub const N_PROCESSES: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum Process {
    Disintegration = 0,
    HydrolysisCarbohydrates,
    HydrolysisProteins,
    HydrolysisLipids,
    UptakeSugars,
    UptakeAminoAcids,
    UptakeFattyAcids,
    UptakeValerate,
    UptakeButyrate,
    UptakePropionate,
    UptakeAcetate,
    UptakeHydrogen,
    DecaySu,
    DecayAa,
    DecayFa,
    DecayC4,
    DecayPro,
    DecayAc,
    DecayH2,
}

impl Process {
    pub const ALL: [Process; N_PROCESSES] = [
        Process::Disintegration,
        Process::HydrolysisCarbohydrates,
        Process::HydrolysisProteins,
        Process::HydrolysisLipids,
        Process::UptakeSugars,
        Process::UptakeAminoAcids,
        Process::UptakeFattyAcids,
        Process::UptakeValerate,
        Process::UptakeButyrate,
        Process::UptakePropionate,
        Process::UptakeAcetate,
        Process::UptakeHydrogen,
        Process::DecaySu,
        Process::DecayAa,
        Process::DecayFa,
        Process::DecayC4,
        Process::DecayPro,
        Process::DecayAc,
        Process::DecayH2,
    ];

    pub const UPTAKES: [Process; 8] = [
        Process::UptakeSugars,
        Process::UptakeAminoAcids,
        Process::UptakeFattyAcids,
        Process::UptakeValerate,
        Process::UptakeButyrate,
        Process::UptakePropionate,
        Process::UptakeAcetate,
        Process::UptakeHydrogen,
    ];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }
}

/// One non-zero coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    process: u8,
    component: u8,
    coef: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stoichiometry {
    dense: [[f64; N_LIQUID]; N_PROCESSES],
    /// Non-zeros ordered by component, then process.
    sparse: Vec<Entry>,
    carbon: [f64; N_LIQUID],
    nitrogen: [f64; N_LIQUID],
}

impl Stoichiometry {
    pub fn new(s: &ParamSet) -> Self {
        let mut carbon = [0.0; N_LIQUID];
        for (c, v) in [
            (SSu, s.c_su),
            (SAa, s.c_aa),
            (SFa, s.c_fa),
            (SVa, s.c_va),
            (SBu, s.c_bu),
            (SPro, s.c_pro),
            (SAc, s.c_ac),
            (SCh4, s.c_ch4),
            (SI, s.c_si),
            (Xc, s.c_xc),
            (XCh, s.c_ch),
            (XPr, s.c_pr),
            (XLi, s.c_li),
            (XSu, s.c_bac),
            (XAa, s.c_bac),
            (XFa, s.c_bac),
            (XC4, s.c_bac),
            (XPro, s.c_bac),
            (XAc, s.c_bac),
            (XH2, s.c_bac),
            (XI, s.c_xi),
        ] {
            carbon[c.index()] = v;
        }
        let mut nitrogen = [0.0; N_LIQUID];
        for (c, v) in [
            (SAa, s.n_aa),
            (SI, s.n_i),
            (Xc, s.n_xc),
            (XPr, s.n_aa),
            (XSu, s.n_bac),
            (XAa, s.n_bac),
            (XFa, s.n_bac),
            (XC4, s.n_bac),
            (XPro, s.n_bac),
            (XAc, s.n_bac),
            (XH2, s.n_bac),
            (XI, s.n_i),
        ] {
            nitrogen[c.index()] = v;
        }

        let mut dense = [[0.0; N_LIQUID]; N_PROCESSES];
        let mut set = |p: Process, entries: &[(Component, f64)]| {
            for &(c, v) in entries {
                dense[p.index()][c.index()] = v;
            }
        };
        use Process as P;
        set(
            P::Disintegration,
            &[
                (Xc, -1.0),
                (SI, s.f_si_xc),
                (XCh, s.f_ch_xc),
                (XPr, s.f_pr_xc),
                (XLi, s.f_li_xc),
                (XI, s.f_xi_xc),
            ],
        );
        set(P::HydrolysisCarbohydrates, &[(XCh, -1.0), (SSu, 1.0)]);
        set(P::HydrolysisProteins, &[(XPr, -1.0), (SAa, 1.0)]);
        set(
            P::HydrolysisLipids,
            &[(XLi, -1.0), (SSu, 1.0 - s.f_fa_li), (SFa, s.f_fa_li)],
        );
        let y = s.y_su;
        set(
            P::UptakeSugars,
            &[
                (SSu, -1.0),
                (SBu, (1.0 - y) * s.f_bu_su),
                (SPro, (1.0 - y) * s.f_pro_su),
                (SAc, (1.0 - y) * s.f_ac_su),
                (SH2, (1.0 - y) * s.f_h2_su),
                (XSu, y),
            ],
        );
        let y = s.y_aa;
        set(
            P::UptakeAminoAcids,
            &[
                (SAa, -1.0),
                (SVa, (1.0 - y) * s.f_va_aa),
                (SBu, (1.0 - y) * s.f_bu_aa),
                (SPro, (1.0 - y) * s.f_pro_aa),
                (SAc, (1.0 - y) * s.f_ac_aa),
                (SH2, (1.0 - y) * s.f_h2_aa),
                (XAa, y),
            ],
        );
        let y = s.y_fa;
        set(
            P::UptakeFattyAcids,
            &[
                (SFa, -1.0),
                (SAc, (1.0 - y) * s.f_ac_fa),
                (SH2, (1.0 - y) * s.f_h2_fa),
                (XFa, y),
            ],
        );
        let y = s.y_c4;
        set(
            P::UptakeValerate,
            &[
                (SVa, -1.0),
                (SPro, (1.0 - y) * s.f_pro_va),
                (SAc, (1.0 - y) * s.f_ac_va),
                (SH2, (1.0 - y) * s.f_h2_va),
                (XC4, y),
            ],
        );
        set(
            P::UptakeButyrate,
            &[
                (SBu, -1.0),
                (SAc, (1.0 - y) * s.f_ac_bu),
                (SH2, (1.0 - y) * s.f_h2_bu),
                (XC4, y),
            ],
        );
        let y = s.y_pro;
        set(
            P::UptakePropionate,
            &[
                (SPro, -1.0),
                (SAc, (1.0 - y) * s.f_ac_pro),
                (SH2, (1.0 - y) * s.f_h2_pro),
                (XPro, y),
            ],
        );
        set(
            P::UptakeAcetate,
            &[(SAc, -1.0), (SCh4, 1.0 - s.y_ac), (XAc, s.y_ac)],
        );
        set(
            P::UptakeHydrogen,
            &[(SH2, -1.0), (SCh4, 1.0 - s.y_h2), (XH2, s.y_h2)],
        );
        for (p, x) in [
            (P::DecaySu, XSu),
            (P::DecayAa, XAa),
            (P::DecayFa, XFa),
            (P::DecayC4, XC4),
            (P::DecayPro, XPro),
            (P::DecayAc, XAc),
            (P::DecayH2, XH2),
        ] {
            set(p, &[(x, -1.0), (Xc, 1.0)]);
        }

        for row in dense.iter_mut() {
            let c: f64 = row.iter().zip(carbon.iter()).map(|(v, c)| v * c).sum();
            let n: f64 = row.iter().zip(nitrogen.iter()).map(|(v, n)| v * n).sum();
            row[SIc.index()] = -c;
            row[SIn.index()] = -n;
        }

        let mut sparse = Vec::new();
        for comp in 0..N_LIQUID {
            for (proc, row) in dense.iter().enumerate() {
                if row[comp] != 0.0 {
                    sparse.push(Entry {
                        process: proc as u8,
                        component: comp as u8,
                        coef: row[comp],
                    });
                }
            }
        }

        Self {
            dense,
            sparse,
            carbon,
            nitrogen,
        }
    }

    /// Coefficient of `component` in `process`.
    pub fn coef(&self, process: Process, component: Component) -> f64 {
        if component.is_liquid() {
            self.dense[process.index()][component.index()]
        } else {
            0.0
        }
    }

    pub fn row(&self, process: Process) -> &[f64; N_LIQUID] {
        &self.dense[process.index()]
    }

    pub fn carbon_content(&self, component: Component) -> f64 {
        if component.is_liquid() {
            self.carbon[component.index()]
        } else {
            0.0
        }
    }

    pub fn nitrogen_content(&self, component: Component) -> f64 {
        if component.is_liquid() {
            self.nitrogen[component.index()]
        } else {
            0.0
        }
    }

    /// Sum of COD-basis coefficients of one process row.
    pub fn cod_balance(&self, process: Process) -> f64 {
        Component::ALL[..N_LIQUID]
            .iter()
            .filter(|c| c.is_cod())
            .map(|c| self.dense[process.index()][c.index()])
            .sum()
    }

    /// `out[i] = sum_j rho[j] * nu[j][i]` for the liquid components.
    #[inline]
    pub fn apply(&self, rho: &[f64; N_PROCESSES], out: &mut [f64; N_LIQUID]) {
        *out = [0.0; N_LIQUID];
        for e in &self.sparse {
            out[e.component as usize] += rho[e.process as usize] * e.coef;
        }
    }
}
