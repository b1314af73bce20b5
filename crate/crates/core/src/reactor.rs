//! Continuously stirred tank reactor with a gas headspace.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CompareError, ConfigError, FormatError, KineticsError, SimulationError, SolverError};
use crate::integrate::{step_fixed, DaeSystem, IntegratorConfig, StepStats};
use crate::kinetics::{check_state, process_rates_unchecked, reaction_terms, Headspace};
use crate::params::AdmParams;
use crate::solver::{proton_from_ions, solve_proton, solve_sh2, Dilution, NewtonConfig};
use crate::state::{AdmState, Component, N_LIQUID, N_STATES};

/// Which states are solved algebraically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AlgebraicMode {
    /// Ion states and S_h2 from algebraic balances at every step.
    #[default]
    Dae,
    /// Everything integrated; ions follow acid-base kinetics and S_H+ comes
    /// from the charge balance in closed form.
    Ode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactorConfig {
    /// Liquid volume, m³.
    pub v_liq: f64,
    /// Headspace volume, m³.
    pub v_gas: f64,
    /// m³/d.
    pub q_in: f64,
    pub q_out: f64,
    /// Gas outlet conductance, m³ d⁻¹ bar⁻¹.
    pub k_p: f64,
    /// Liquid components only.
    pub inflow: AdmState,
}

impl ReactorConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |what: &str, v: f64| Err(ConfigError::Invalid(format!("{what} = {v}")));
        if !(self.v_liq > 0.0 && self.v_liq.is_finite()) {
            return bad("V_liq", self.v_liq);
        }
        if !(self.v_gas > 0.0 && self.v_gas.is_finite()) {
            return bad("V_gas", self.v_gas);
        }
        if !(self.q_in >= 0.0 && self.q_in.is_finite()) {
            return bad("q_in", self.q_in);
        }
        if !(self.q_out >= 0.0 && self.q_out.is_finite()) {
            return bad("q_out", self.q_out);
        }
        if self.q_in != self.q_out {
            return Err(ConfigError::Invalid(format!(
                "q_in ({}) must equal q_out ({}): liquid volume is constant",
                self.q_in, self.q_out
            )));
        }
        if !(self.k_p >= 0.0 && self.k_p.is_finite()) {
            return bad("k_p", self.k_p);
        }
        if let Some((i, v)) = self
            .inflow
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
        {
            return bad(Component::ALL[i].name(), *v);
        }
        Ok(())
    }

    pub fn dilution(&self) -> Dilution {
        Dilution::new(self.q_in, self.q_out, self.v_liq)
    }

    pub fn headspace(&self) -> Headspace {
        Headspace::new(self.v_liq, self.v_gas, self.k_p)
    }
}

/// Time derivative of every state plus the gas outflow at that state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub d: [f64; N_STATES],
    /// m³/d.
    pub q_gas: f64,
}

fn rhs(
    state: &AdmState,
    inflow: &AdmState,
    dilution: Dilution,
    headspace: &Headspace,
    params: &AdmParams,
) -> Derivative {
    let rates = process_rates_unchecked(state, params);
    let (mut d, q_gas) = reaction_terms(state, &rates, params, headspace);
    let liquid = inflow.values().iter().zip(state.values()).take(N_LIQUID);
    for (di, (cin, c)) in d.iter_mut().zip(liquid) {
        *di += dilution.inflow * cin - dilution.outflow * c;
    }
    Derivative { d, q_gas }
}

/// Full derivative of the tank at `state`: dilution, reactions, liquid-gas
/// transfer and headspace. Ion entries carry the acid-base kinetics.
pub fn cstr_rhs(
    state: &AdmState,
    cfg: &ReactorConfig,
    params: &AdmParams,
) -> Result<Derivative, KineticsError> {
    check_state(state, params.negative_tolerance)?;
    Ok(rhs(state, &cfg.inflow, cfg.dilution(), &cfg.headspace(), params))
}

/// A configured tank. Immutable once built, so one instance can drive any
/// number of independent states concurrently.
#[derive(Debug, Clone)]
pub struct Reactor {
    pub config: ReactorConfig,
    pub params: AdmParams,
    pub mode: AlgebraicMode,
    pub newton: NewtonConfig,
    dilution: Dilution,
    headspace: Headspace,
    inflow: AdmState,
    mask: [bool; N_STATES],
}

impl Reactor {
    pub fn new(
        config: ReactorConfig,
        params: AdmParams,
        mode: AlgebraicMode,
        newton: NewtonConfig,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        newton
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(Self::with_headspace(config.headspace(), config, params, mode, newton))
    }

    /// Like [`Reactor::new`] but with an explicit headspace description, for
    /// sub-volumes that share the headspace coefficients of a larger tank.
    pub fn with_headspace(
        headspace: Headspace,
        config: ReactorConfig,
        params: AdmParams,
        mode: AlgebraicMode,
        newton: NewtonConfig,
    ) -> Self {
        let mut mask = [true; N_STATES];
        if mode == AlgebraicMode::Dae {
            for ion in Component::IONS {
                mask[ion.index()] = false;
            }
            mask[Component::SH2.index()] = false;
        }
        Self {
            dilution: config.dilution(),
            inflow: config.inflow.liquid_only(),
            headspace,
            config,
            params,
            mode,
            newton,
            mask,
        }
    }

    pub fn headspace(&self) -> &Headspace {
        &self.headspace
    }

    pub fn dilution(&self) -> Dilution {
        self.dilution
    }

    pub fn rhs(&self, state: &AdmState) -> Derivative {
        rhs(state, &self.inflow, self.dilution, &self.headspace, &self.params)
    }

    /// Copy of `initial` with algebraic states made consistent.
    pub fn consistent(&self, initial: &AdmState) -> Result<AdmState, SolverError> {
        let mut y = *initial;
        check_state(&y, self.params.negative_tolerance)?;
        if self.mode == AlgebraicMode::Ode {
            // ions start in equilibrium with the given S_H+
            let mut eq = y;
            solve_proton(&mut eq, &self.params, &self.newton)?;
            if !(y.s_h() > 0.0) {
                y = eq;
            } else {
                let ions = crate::solver::equilibrium_ions(y.s_h(), &y, &self.params);
                for (k, ion) in Component::IONS.iter().enumerate() {
                    if y[*ion] == 0.0 {
                        y[*ion] = ions[k];
                    }
                }
            }
        }
        self.project(&mut y, &mut StepStats::default())?;
        Ok(y)
    }

    /// Integrate from `initial` for `duration_days`, recording every
    /// `stride` steps and at the final step.
    pub fn simulate(
        &self,
        initial: &AdmState,
        duration_days: f64,
        integrator: &IntegratorConfig,
        stride: u64,
    ) -> Result<(Trajectory, StepStats), SimulationError> {
        let at = |k: u64, dt: f64| move |source: SolverError| SimulationError {
            time_d: k as f64 * dt,
            source,
        };
        integrator.validate().map_err(at(0, 0.0))?;
        if !(duration_days >= 0.0 && duration_days.is_finite()) {
            return Err(at(0, 0.0)(SolverError::Config(format!(
                "duration = {duration_days} d"
            ))));
        }
        let stride = stride.max(1);
        let dt = integrator.dt_days();
        let n_steps = (duration_days / dt).round() as u64;
        let mut stats = StepStats::default();
        let mut y = self.consistent(initial).map_err(at(0, dt))?;
        let mut traj = Trajectory::default();
        traj.push(0.0, y, self.rhs(&y).q_gas);
        for k in 1..=n_steps {
            step_fixed(&mut y, self, dt, integrator, &mut stats).map_err(at(k, dt))?;
            if k % stride == 0 || k == n_steps {
                traj.push(k as f64 * dt, y, self.rhs(&y).q_gas);
            }
        }
        Ok((traj, stats))
    }
}

impl DaeSystem for Reactor {
    #[inline]
    fn derivative(&self, y: &AdmState) -> Result<[f64; N_STATES], SolverError> {
        Ok(self.rhs(y).d)
    }

    fn project(&self, y: &mut AdmState, stats: &mut StepStats) -> Result<(), SolverError> {
        match self.mode {
            AlgebraicMode::Dae => {
                let r = solve_proton(y, &self.params, &self.newton)?;
                stats.proton_solves += 1;
                stats.newton_iterations += r.iterations as u64;
                stats.max_proton_residual = stats.max_proton_residual.max(r.residual.abs());
                let r = solve_sh2(y, &self.inflow, self.dilution, &self.params, &self.newton)?;
                stats.hydrogen_solves += 1;
                stats.newton_iterations += r.iterations as u64;
                stats.max_hydrogen_residual = stats.max_hydrogen_residual.max(r.residual.abs());
            }
            AlgebraicMode::Ode => y.set_s_h(proton_from_ions(y, &self.params)),
        }
        Ok(())
    }

    fn differential(&self) -> &[bool; N_STATES] {
        &self.mask
    }

    fn negative_tolerance(&self) -> f64 {
        self.params.negative_tolerance
    }
}

/// Number of steps of `dt_days` closest to `interval_days`, at least 1.
pub fn stride_for(interval_days: f64, dt_days: f64) -> u64 {
    ((interval_days / dt_days).round() as u64).max(1)
}

/// Integrate a tank in DAE mode with the default Newton settings.
pub fn run(
    cfg: &ReactorConfig,
    params: &AdmParams,
    initial: &AdmState,
    duration_days: f64,
    integrator: &IntegratorConfig,
    output_stride: u64,
) -> Result<Trajectory, SimulationError> {
    let reactor = Reactor::new(cfg.clone(), params.clone(), AlgebraicMode::Dae, NewtonConfig::default())
        .map_err(|e| SimulationError {
            time_d: 0.0,
            source: SolverError::Config(e.to_string()),
        })?;
    Ok(reactor
        .simulate(initial, duration_days, integrator, output_stride)?
        .0)
}

/// Recorded states of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    /// d, strictly increasing.
    pub times: Vec<f64>,
    pub states: Vec<AdmState>,
    pub ph: Vec<f64>,
    /// m³/d.
    pub gas_flow: Vec<f64>,
}

/// A scalar series that can be extracted from a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    State(Component),
    Ph,
    GasFlow,
}

impl Series {
    pub fn name(&self) -> &'static str {
        match self {
            Series::State(c) => c.name(),
            Series::Ph => "pH",
            Series::GasFlow => "q_gas_m3_d",
        }
    }
}

impl std::str::FromStr for Series {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pH" | "ph" => Ok(Series::Ph),
            "q_gas" | "q_gas_m3_d" => Ok(Series::GasFlow),
            // gas-phase methane as usually labelled in result tables
            "G_ch4" => Ok(Series::State(Component::SGasCh4)),
            _ => s.parse().map(Series::State),
        }
    }
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, state: AdmState, q_gas: f64) {
        self.times.push(t);
        self.ph.push(state.ph());
        self.states.push(state);
        self.gas_flow.push(q_gas);
    }

    pub fn last(&self) -> Option<&AdmState> {
        self.states.last()
    }

    pub fn series(&self, s: Series) -> Vec<f64> {
        match s {
            Series::State(c) => self.states.iter().map(|y| y[c]).collect(),
            Series::Ph => self.ph.clone(),
            Series::GasFlow => self.gas_flow.clone(),
        }
    }

    pub fn header() -> String {
        let mut cols = vec!["time_d"];
        cols.extend(Component::NAMES);
        cols.push("pH");
        cols.push("q_gas_m3_d");
        cols.join(",")
    }

    /// 17 significant digits, so reading back is lossless.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::header())?;
        let mut line = String::with_capacity(40 * (N_STATES + 3));
        for k in 0..self.len() {
            use std::fmt::Write as _;
            line.clear();
            let _ = write!(line, "{:.16e}", self.times[k]);
            for v in self.states[k].values() {
                let _ = write!(line, ",{v:.16e}");
            }
            let _ = write!(line, ",{:.16e},{:.16e}", self.ph[k], self.gas_flow[k]);
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, FormatError> {
        let mut lines = r.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim() != Self::header() {
            return Err(FormatError::Parse {
                line: 1,
                msg: "unexpected trajectory header".into(),
            });
        }
        let mut t = Trajectory::default();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            let fields = fields.map_err(|e| FormatError::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
            if fields.len() != N_STATES + 3 {
                return Err(FormatError::Parse {
                    line: lineno,
                    msg: format!("expected {} columns, found {}", N_STATES + 3, fields.len()),
                });
            }
            let mut values = [0.0; N_STATES];
            values.copy_from_slice(&fields[1..=N_STATES]);
            let ph = fields[N_STATES + 1];
            let time = fields[0];
            if t.times.last().is_some_and(|&prev| time <= prev) {
                return Err(FormatError::Parse {
                    line: lineno,
                    msg: "times must be strictly increasing".into(),
                });
            }
            t.times.push(time);
            t.states.push(AdmState::from_values(values, 10f64.powf(-ph)));
            t.ph.push(ph);
            t.gas_flow.push(fields[N_STATES + 2]);
        }
        Ok(t)
    }
}

/// Relative time-grid tolerance for comparing trajectories.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// `100 * rms(c - r) / rms(r)`, in percent.
pub fn relative_rmse(
    candidate: &Trajectory,
    reference: &Trajectory,
    series: Series,
) -> Result<f64, CompareError> {
    if candidate.len() != reference.len() {
        return Err(CompareError::GridMismatch(format!(
            "{} vs {} samples",
            candidate.len(),
            reference.len()
        )));
    }
    for (k, (a, b)) in candidate.times.iter().zip(&reference.times).enumerate() {
        if (a - b).abs() > GRID_TOLERANCE * a.abs().max(b.abs()).max(1.0) {
            return Err(CompareError::GridMismatch(format!("sample {k}: t = {a} vs {b}")));
        }
    }
    let c = candidate.series(series);
    let r = reference.series(series);
    let num: f64 = c.iter().zip(&r).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = r.iter().map(|b| b * b).sum();
    if den == 0.0 {
        return Err(CompareError::ZeroReference(series.name().into()));
    }
    Ok(100.0 * (num / den).sqrt())
}
