//! Fixed-step integration of the semi-explicit DAE. Each step advances the
//! differential states, clamps round-off negatives, and re-solves the
//! algebraic states through [`DaeSystem::project`].

use serde::{Deserialize, Serialize};

use crate::error::{KineticsError, SolverError};
use crate::state::{AdmState, Component, N_STATES};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Explicit Euler with a constant step. The production scheme.
    #[default]
    FixedEuler,
    /// Classical RK4 with projection at every stage. Reference runs only.
    FixedRk4Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Inner step, s.
    pub dt_inner: f64,
    /// Inner steps per coupling interval of a particle field.
    pub substeps_per_outer: u32,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::FixedEuler,
            dt_inner: 0.05,
            substeps_per_outer: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn dt_days(&self) -> f64 {
        self.dt_inner / SECONDS_PER_DAY
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt_inner > 0.0 && self.dt_inner.is_finite()) {
            return Err(SolverError::Config(format!("dt_inner = {} s", self.dt_inner)));
        }
        if self.substeps_per_outer < 1 {
            return Err(SolverError::Config("substeps_per_outer must be >= 1".into()));
        }
        Ok(())
    }
}

/// Counters accumulated over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub steps: u64,
    /// Negatives within tolerance that were reset to zero.
    pub clamped: u64,
    pub proton_solves: u64,
    pub max_proton_residual: f64,
    pub hydrogen_solves: u64,
    pub max_hydrogen_residual: f64,
    pub newton_iterations: u64,
}

impl StepStats {
    pub fn merge(&mut self, other: &StepStats) {
        self.steps += other.steps;
        self.clamped += other.clamped;
        self.proton_solves += other.proton_solves;
        self.max_proton_residual = self.max_proton_residual.max(other.max_proton_residual);
        self.hydrogen_solves += other.hydrogen_solves;
        self.max_hydrogen_residual = self.max_hydrogen_residual.max(other.max_hydrogen_residual);
        self.newton_iterations += other.newton_iterations;
    }
}

/// A semi-explicit DAE `y' = f(y)` for differential states, `0 = g(y)` for
/// the rest.
pub trait DaeSystem {
    /// Time derivative. Entries of algebraic states are ignored.
    fn derivative(&self, y: &AdmState) -> Result<[f64; N_STATES], SolverError>;
    /// Restore algebraic consistency in place.
    fn project(&self, y: &mut AdmState, stats: &mut StepStats) -> Result<(), SolverError>;
    fn differential(&self) -> &[bool; N_STATES];
    /// Negatives in `[-tolerance, 0)` are clamped, lower ones are errors.
    fn negative_tolerance(&self) -> f64;
}

/// Reset round-off negatives to zero. Values below `-tolerance` are an error.
pub fn clamp_negatives(
    y: &mut AdmState,
    tolerance: f64,
    stats: &mut StepStats,
) -> Result<(), KineticsError> {
    for (i, v) in y.values_mut().iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -tolerance {
                return Err(KineticsError::InvalidState {
                    component: Component::ALL[i],
                    value: *v,
                    tolerance,
                });
            }
            *v = 0.0;
            stats.clamped += 1;
        } else if v.is_nan() {
            return Err(KineticsError::InvalidState {
                component: Component::ALL[i],
                value: *v,
                tolerance,
            });
        }
    }
    Ok(())
}

fn axpy(y: &AdmState, h: f64, k: &[f64; N_STATES], mask: &[bool; N_STATES]) -> AdmState {
    let mut out = *y;
    for i in 0..N_STATES {
        if mask[i] {
            out.values_mut()[i] += h * k[i];
        }
    }
    out
}

fn settle<S: DaeSystem>(
    sys: &S,
    y: &mut AdmState,
    stats: &mut StepStats,
) -> Result<(), SolverError> {
    clamp_negatives(y, sys.negative_tolerance(), stats)?;
    sys.project(y, stats)
}

/// Advance `state` by `dt_days` using `cfg.scheme`. `state` must already be
/// algebraically consistent; it is again on return.
pub fn step_fixed<S: DaeSystem>(
    state: &mut AdmState,
    sys: &S,
    dt_days: f64,
    cfg: &IntegratorConfig,
    stats: &mut StepStats,
) -> Result<(), SolverError> {
    let mask = sys.differential();
    let mut next = match cfg.scheme {
        Scheme::FixedEuler => {
            let k = sys.derivative(state)?;
            axpy(state, dt_days, &k, mask)
        }
        Scheme::FixedRk4Oracle => {
            let h = dt_days;
            let k1 = sys.derivative(state)?;
            let mut y2 = axpy(state, 0.5 * h, &k1, mask);
            settle(sys, &mut y2, stats)?;
            let k2 = sys.derivative(&y2)?;
            let mut y3 = axpy(state, 0.5 * h, &k2, mask);
            settle(sys, &mut y3, stats)?;
            let k3 = sys.derivative(&y3)?;
            let mut y4 = axpy(state, h, &k3, mask);
            settle(sys, &mut y4, stats)?;
            let k4 = sys.derivative(&y4)?;
            let mut k = [0.0; N_STATES];
            for i in 0..N_STATES {
                k[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
            }
            axpy(state, h, &k, mask)
        }
    };
    settle(sys, &mut next, stats)?;
    *state = next;
    stats.steps += 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Linear decay `y' = -y` on every state, no algebraic part.
    struct Decay([bool; N_STATES]);

    impl DaeSystem for Decay {
        fn derivative(&self, y: &AdmState) -> Result<[f64; N_STATES], SolverError> {
            Ok(y.values().map(|v| -v))
        }
        fn project(&self, _: &mut AdmState, _: &mut StepStats) -> Result<(), SolverError> {
            Ok(())
        }
        fn differential(&self) -> &[bool; N_STATES] {
            &self.0
        }
        fn negative_tolerance(&self) -> f64 {
            1e-12
        }
    }

    struct Still([bool; N_STATES]);

    impl DaeSystem for Still {
        fn derivative(&self, _: &AdmState) -> Result<[f64; N_STATES], SolverError> {
            Ok([0.0; N_STATES])
        }
        fn project(&self, _: &mut AdmState, _: &mut StepStats) -> Result<(), SolverError> {
            Ok(())
        }
        fn differential(&self) -> &[bool; N_STATES] {
            &self.0
        }
        fn negative_tolerance(&self) -> f64 {
            1e-12
        }
    }

    fn run(scheme: Scheme, n: usize) -> f64 {
        let sys = Decay([true; N_STATES]);
        let mut y = AdmState::from_values([1.0; N_STATES], 1e-7);
        let cfg = IntegratorConfig {
            scheme,
            ..Default::default()
        };
        let mut stats = StepStats::default();
        let h = 1.0 / n as f64;
        for _ in 0..n {
            step_fixed(&mut y, &sys, h, &cfg, &mut stats).unwrap();
        }
        (y.values()[0] - (-1.0f64).exp()).abs()
    }

    #[test]
    fn zero_rhs_leaves_state_unchanged() {
        let sys = Still([true; N_STATES]);
        let y0 = AdmState::from_values(std::array::from_fn(|i| i as f64 * 0.37), 3e-8);
        for scheme in [Scheme::FixedEuler, Scheme::FixedRk4Oracle] {
            let mut y = y0;
            let cfg = IntegratorConfig {
                scheme,
                ..Default::default()
            };
            step_fixed(&mut y, &sys, 0.1, &cfg, &mut StepStats::default()).unwrap();
            assert_eq!(y, y0);
        }
    }

    #[test]
    fn euler_is_first_order() {
        let ratio = run(Scheme::FixedEuler, 100) / run(Scheme::FixedEuler, 200);
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn rk4_is_fourth_order() {
        let ratio = run(Scheme::FixedRk4Oracle, 10) / run(Scheme::FixedRk4Oracle, 20);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn algebraic_entries_are_not_integrated() {
        let mut mask = [true; N_STATES];
        mask[3] = false;
        let sys = Decay(mask);
        let mut y = AdmState::from_values([1.0; N_STATES], 1e-7);
        step_fixed(&mut y, &sys, 0.5, &IntegratorConfig::default(), &mut StepStats::default())
            .unwrap();
        assert_eq!(y.values()[3], 1.0);
        assert_eq!(y.values()[2], 0.5);
    }

    #[test]
    fn clamps_round_off_and_rejects_real_negatives() {
        let mut stats = StepStats::default();
        let mut y = AdmState::zero();
        y.values_mut()[0] = -5e-13;
        clamp_negatives(&mut y, 1e-12, &mut stats).unwrap();
        assert_eq!(y.values()[0], 0.0);
        assert_eq!(stats.clamped, 1);
        y.values_mut()[1] = -1e-9;
        assert!(clamp_negatives(&mut y, 1e-12, &mut stats).is_err());
    }
}
