//! Algebraic part of the DAE: the proton charge balance and the soluble
//! hydrogen balance, both solved by a bracketed Newton iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Iterate, KineticsError, SolverError};
use crate::kinetics::{gas_pressures, hydrogen_uptake, process_rates_unchecked};
use crate::inhibition::{total_inhibition, Uptake};
use crate::params::AdmParams;
use crate::state::{AdmState, Component, NEUTRAL_PROTON};
use crate::stoichiometry::Process;

use Component::*;

/// COD per mole of the volatile fatty acids, kgCOD/kmol.
pub const COD_PER_MOL_AC: f64 = 64.0;
pub const COD_PER_MOL_PRO: f64 = 112.0;
pub const COD_PER_MOL_BU: f64 = 160.0;
pub const COD_PER_MOL_VA: f64 = 208.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialGuess {
    /// Warm start from the value carried in the state.
    #[default]
    PreviousValue,
    /// pH 7 for the proton solve, the bracket midpoint for hydrogen.
    NeutralPh,
    /// Geometric midpoint of the search bracket.
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub max_iterations: usize,
    /// Residual bound, in the units of the balance being solved.
    pub absolute_tolerance: f64,
    /// Newton step bound relative to the iterate.
    pub relative_tolerance: f64,
    pub initial_guess: InitialGuess,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            absolute_tolerance: 1e-12,
            relative_tolerance: 1e-12,
            initial_guess: InitialGuess::PreviousValue,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.max_iterations < 1 {
            return Err(SolverError::Config("max_iterations must be >= 1".into()));
        }
        if !(self.absolute_tolerance > 0.0 && self.relative_tolerance > 0.0) {
            return Err(SolverError::Config("tolerances must be > 0".into()));
        }
        Ok(())
    }
}

/// Outcome of a scalar root solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// Residual evaluated at `x`.
    pub residual: f64,
    pub iterations: usize,
}

/// Bracket `[lo, hi]` of a root of an increasing function on `[0, inf)`.
struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    /// Geometric bisection; expands when one side is still open.
    fn split(&self, x: f64) -> f64 {
        if self.hi.is_infinite() {
            self.lo.max(x) * 10.0
        } else if self.lo == 0.0 {
            self.hi * 0.1
        } else {
            (self.lo * self.hi).sqrt().clamp(self.lo, self.hi)
        }
    }

    fn collapsed(&self) -> bool {
        self.hi.is_finite() && self.hi - self.lo <= 4.0 * f64::EPSILON * self.hi
    }
}

/// Root of an increasing function `f` on `(0, inf)` whose value tends to a
/// non-positive limit at 0. `f` returns `(value, derivative)`. Newton steps
/// that leave the current bracket are replaced by bisection; if Newton has
/// not converged after `max_iterations`, pure bisection gets another
/// `max_iterations`.
fn solve_increasing<F>(
    mut f: F,
    x0: f64,
    cfg: &NewtonConfig,
    trace: &mut Option<Vec<Iterate>>,
) -> Result<Root, f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut b = Bracket {
        lo: 0.0,
        hi: f64::INFINITY,
    };
    let mut x = if x0 > 0.0 && x0.is_finite() {
        x0
    } else {
        NEUTRAL_PROTON
    };
    let mut last = f64::NAN;
    let mut record = |x: f64, r: f64| {
        if let Some(t) = trace.as_mut() {
            t.push(Iterate { x, residual: r });
        }
    };

    for it in 0..cfg.max_iterations {
        let (fx, dfx) = f(x);
        record(x, fx);
        last = fx;
        if fx == 0.0 {
            return Ok(Root {
                x,
                residual: 0.0,
                iterations: it + 1,
            });
        }
        if fx < 0.0 {
            b.lo = x;
        } else {
            b.hi = x;
        }
        let step = fx / dfx;
        let xn = x - step;
        let inside = xn > b.lo && xn < b.hi;
        if inside && fx.abs() <= cfg.absolute_tolerance && step.abs() <= cfg.relative_tolerance * x
        {
            // an already-converged start is a fixed point, so re-projecting
            // a consistent state (e.g. on restart) changes no bits
            if it == 0 {
                return Ok(Root {
                    x,
                    residual: fx,
                    iterations: 1,
                });
            }
            let (fxn, _) = f(xn);
            record(xn, fxn);
            if fxn.abs() <= cfg.absolute_tolerance {
                return Ok(Root {
                    x: xn,
                    residual: fxn,
                    iterations: it + 2,
                });
            }
            return Ok(Root {
                x,
                residual: fx,
                iterations: it + 2,
            });
        }
        if b.collapsed() {
            return finish(x, fx, it + 1, cfg).ok_or(fx);
        }
        x = if inside { xn } else { b.split(x) };
    }

    // Newton did not settle: bisect what is left of the bracket.
    for it in 0..cfg.max_iterations {
        x = b.split(x);
        let (fx, _) = f(x);
        record(x, fx);
        last = fx;
        if fx == 0.0 {
            return Ok(Root {
                x,
                residual: 0.0,
                iterations: cfg.max_iterations + it + 1,
            });
        }
        if fx < 0.0 {
            b.lo = x;
        } else {
            b.hi = x;
        }
        let narrow = b.hi.is_finite() && b.hi - b.lo <= cfg.relative_tolerance * b.hi;
        if (narrow && fx.abs() <= cfg.absolute_tolerance) || b.collapsed() {
            if let Some(r) = finish(x, fx, cfg.max_iterations + it + 1, cfg) {
                return Ok(r);
            }
            break;
        }
    }
    Err(last)
}

fn finish(x: f64, fx: f64, iterations: usize, cfg: &NewtonConfig) -> Option<Root> {
    (fx.abs() <= cfg.absolute_tolerance).then_some(Root {
        x,
        residual: fx,
        iterations,
    })
}

fn solve_with_trace<F>(
    what: &'static str,
    mut f: F,
    x0: f64,
    cfg: &NewtonConfig,
) -> Result<Root, SolverError>
where
    F: FnMut(f64) -> (f64, f64),
{
    match solve_increasing(&mut f, x0, cfg, &mut None) {
        Ok(r) => Ok(r),
        Err(_) => {
            // Deterministic, so a second pass reproduces the failing iterates.
            let mut trace = Some(Vec::new());
            let last = solve_increasing(&mut f, x0, cfg, &mut trace).err().unwrap_or(f64::NAN);
            Err(SolverError::Convergence {
                what,
                last_residual: last,
                trace: trace.unwrap_or_default(),
            })
        }
    }
}

/// Ion states in equilibrium with proton concentration `s_h`, in state
/// order (va⁻, bu⁻, pro⁻, ac⁻, HCO3⁻, NH3).
#[inline]
pub fn equilibrium_ions(s_h: f64, state: &AdmState, p: &AdmParams) -> [f64; 6] {
    let f = |ka: f64, total: f64| ka * total / (ka + s_h);
    [
        f(p.ka_va, state[SVa]),
        f(p.ka_bu, state[SBu]),
        f(p.ka_pro, state[SPro]),
        f(p.ka_ac, state[SAc]),
        f(p.ka_co2, state[SIc]),
        f(p.ka_in, state[SIn]),
    ]
}

/// Charge balance and its derivative with respect to `s_h`.
#[inline]
fn charge_balance(s_h: f64, state: &AdmState, p: &AdmParams) -> (f64, f64) {
    let g = |ka: f64, total: f64| {
        let d = ka + s_h;
        (ka * total / d, ka * total / (d * d))
    };
    let (va, dva) = g(p.ka_va, state[SVa]);
    let (bu, dbu) = g(p.ka_bu, state[SBu]);
    let (pro, dpro) = g(p.ka_pro, state[SPro]);
    let (ac, dac) = g(p.ka_ac, state[SAc]);
    let (hco3, dhco3) = g(p.ka_co2, state[SIc]);
    let (nh3, dnh3) = g(p.ka_in, state[SIn]);
    let nh4 = state[SIn] - nh3;
    let oh = p.kw / s_h;
    let e = state[SCat] + nh4 + s_h
        - hco3
        - ac / COD_PER_MOL_AC
        - pro / COD_PER_MOL_PRO
        - bu / COD_PER_MOL_BU
        - va / COD_PER_MOL_VA
        - oh
        - state[SAn];
    let de = 1.0
        + dnh3
        + dhco3
        + dac / COD_PER_MOL_AC
        + dpro / COD_PER_MOL_PRO
        + dbu / COD_PER_MOL_BU
        + dva / COD_PER_MOL_VA
        + oh / s_h;
    (e, de)
}

/// Residual of the electroneutrality condition at proton concentration
/// `s_h`, with every ion in equilibrium at that `s_h`. Strictly increasing in
/// `s_h` for non-negative totals.
pub fn charge_balance_residual(
    s_h: f64,
    state: &AdmState,
    params: &AdmParams,
) -> Result<f64, KineticsError> {
    if !(s_h > 0.0) {
        return Err(KineticsError::Domain {
            name: "S_H",
            value: s_h,
            why: "proton concentration must be positive",
        });
    }
    Ok(charge_balance(s_h, state, params).0)
}

/// Solve the charge balance for `S_H+`, then store `S_H+` and the six
/// equilibrium ion states in `state`.
pub fn solve_proton(
    state: &mut AdmState,
    params: &AdmParams,
    cfg: &NewtonConfig,
) -> Result<Root, SolverError> {
    let x0 = match cfg.initial_guess {
        InitialGuess::PreviousValue => state.s_h(),
        InitialGuess::NeutralPh => NEUTRAL_PROTON,
        // midpoint of [1e-14, 1] on the log scale
        InitialGuess::Midpoint => 1e-7,
    };
    let frozen = *state;
    let root = solve_with_trace("charge balance", |h| charge_balance(h, &frozen, params), x0, cfg)?;
    state.set_s_h(root.x);
    let ions = equilibrium_ions(root.x, state, params);
    for (k, ion) in Component::IONS.iter().enumerate() {
        state[*ion] = ions[k];
    }
    Ok(root)
}

/// Proton concentration from integrated ion states (closed form of the
/// charge balance, used when ions are differential states).
pub fn proton_from_ions(state: &AdmState, p: &AdmParams) -> f64 {
    let phi = state[SCat] + (state[SIn] - state[SNh3])
        - state[SHco3Ion]
        - state[SAcIon] / COD_PER_MOL_AC
        - state[SProIon] / COD_PER_MOL_PRO
        - state[SBuIon] / COD_PER_MOL_BU
        - state[SVaIon] / COD_PER_MOL_VA
        - state[SAn];
    // s_h^2 + phi s_h - kw = 0, the positive root without cancellation
    let disc = (phi * phi + 4.0 * p.kw).sqrt();
    if phi > 0.0 {
        2.0 * p.kw / (phi + disc)
    } else {
        0.5 * (disc - phi)
    }
}

/// Hydraulic dilution rates q/V, d⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dilution {
    pub inflow: f64,
    pub outflow: f64,
}

impl Dilution {
    pub fn new(q_in: f64, q_out: f64, v_liq: f64) -> Self {
        Self {
            inflow: q_in / v_liq,
            outflow: q_out / v_liq,
        }
    }

    pub fn closed() -> Self {
        Self::default()
    }
}

/// Hydrogen-dependent pieces of the S_h2 balance at a fixed state.
struct HydrogenBalance {
    constant: f64,
    /// (production rate without H2 inhibition, K_I) per H2-inhibited uptake.
    inhibited: [(f64, f64); 4],
    x_h2: f64,
    uptake_inhibition: f64,
    outflow: f64,
    k_la: f64,
}

impl HydrogenBalance {
    fn new(state: &AdmState, inflow: &AdmState, dilution: Dilution, p: &AdmParams) -> Self {
        let mut s0 = *state;
        s0[SH2] = 0.0;
        let base = process_rates_unchecked(&s0, p);
        let nu = |proc: Process| p.stoich.coef(proc, SH2);
        let set = &p.set;
        let free = nu(Process::UptakeSugars) * base.get(Process::UptakeSugars)
            + nu(Process::UptakeAminoAcids) * base.get(Process::UptakeAminoAcids);
        let inhibited = [
            (
                nu(Process::UptakeFattyAcids) * base.get(Process::UptakeFattyAcids),
                set.k_i_h2_fa,
            ),
            (
                nu(Process::UptakeValerate) * base.get(Process::UptakeValerate),
                set.k_i_h2_c4,
            ),
            (
                nu(Process::UptakeButyrate) * base.get(Process::UptakeButyrate),
                set.k_i_h2_c4,
            ),
            (
                nu(Process::UptakePropionate) * base.get(Process::UptakePropionate),
                set.k_i_h2_pro,
            ),
        ];
        let p_h2 = gas_pressures(state, p).h2;
        Self {
            constant: dilution.inflow * inflow[SH2] + free + set.k_la * 16.0 * p.kh_h2 * p_h2,
            inhibited,
            x_h2: state[XH2].max(0.0),
            uptake_inhibition: total_inhibition(Uptake::Hydrogen, state, p),
            outflow: dilution.outflow,
            k_la: set.k_la,
        }
    }

    /// `(E(S), dE/dS)`; E is decreasing in S.
    #[inline]
    fn eval(&self, s: f64, p: &AdmParams) -> (f64, f64) {
        let mut e = self.constant - (self.outflow + self.k_la) * s;
        let mut de = -(self.outflow + self.k_la);
        for &(r0, k) in &self.inhibited {
            let d = k + s;
            e += r0 * k / d;
            de -= r0 * k / (d * d);
        }
        let (u, du) = hydrogen_uptake(s, self.x_h2, self.uptake_inhibition, p);
        (e - u, de - du)
    }
}

/// Residual of the soluble hydrogen balance at candidate `s_h2`, with every
/// hydrogen-dependent uptake and inhibition term evaluated at `s_h2`.
pub fn hydrogen_balance_residual(
    s_h2: f64,
    state: &AdmState,
    inflow: &AdmState,
    dilution: Dilution,
    params: &AdmParams,
) -> f64 {
    HydrogenBalance::new(state, inflow, dilution, params)
        .eval(s_h2, params)
        .0
}

/// Solve the soluble hydrogen balance for S_h2 and store it in `state`.
/// Ion states and S_H+ in `state` should already be consistent.
pub fn solve_sh2(
    state: &mut AdmState,
    inflow: &AdmState,
    dilution: Dilution,
    params: &AdmParams,
    cfg: &NewtonConfig,
) -> Result<Root, SolverError> {
    let balance = HydrogenBalance::new(state, inflow, dilution, params);
    let (e0, _) = balance.eval(0.0, params);
    if e0 <= 0.0 {
        // no net hydrogen source even at zero concentration
        state[SH2] = 0.0;
        return Ok(Root {
            x: 0.0,
            residual: e0,
            iterations: 1,
        });
    }
    let x0 = match cfg.initial_guess {
        InitialGuess::PreviousValue if state[SH2] > 0.0 => state[SH2],
        // the uptake half-saturation constant sets the natural scale
        _ => params.set.k_s_h2,
    };
    let root = solve_with_trace(
        "hydrogen balance",
        |s| {
            let (e, de) = balance.eval(s, params);
            (-e, -de)
        },
        x0,
        cfg,
    )?;
    state[SH2] = root.x;
    Ok(Root {
        residual: -root.residual,
        ..root
    })
}
