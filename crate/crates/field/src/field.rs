//! One closed micro-reactor per particle, advanced in lockstep with a
//! sequence of particle snapshots.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use chad_core::integrate::{step_fixed, IntegratorConfig, Scheme, StepStats};
use chad_core::kinetics::Headspace;
use chad_core::reactor::{AlgebraicMode, Reactor, ReactorConfig};
use chad_core::{AdmParams, AdmState, Component, NewtonConfig, SimulationError, SolverError};
use thiserror::Error;

use crate::engine::{Engine, ItemFailures};
use crate::snapshot::{ParticleSnapshot, SnapshotError};

/// Relative tolerance on snapshot times.
pub const TIME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("invalid field configuration: {0}")]
    Config(String),
    #[error("snapshot time {found} s does not follow field time by one outer step (expected {expected} s)")]
    TimeGap { expected: f64, found: f64 },
    #[error("snapshot particle ids differ from the field: {0}")]
    IdMismatch(String),
    #[error("particle {id}: {source}")]
    Particle {
        id: u64,
        #[source]
        source: SimulationError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Outer (snapshot) cadence and inner kinetic steps per outer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncPolicy {
    /// s.
    pub outer_dt: f64,
    pub inner_substeps: u32,
}

impl Default for SyncPolicy {
    fn default() -> Self {
        Self {
            outer_dt: 0.5,
            inner_substeps: 10,
        }
    }
}

impl SyncPolicy {
    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.outer_dt > 0.0 && self.outer_dt.is_finite()) {
            return Err(FieldError::Config(format!("outer_dt = {}", self.outer_dt)));
        }
        if self.inner_substeps < 1 {
            return Err(FieldError::Config("inner_substeps must be >= 1".into()));
        }
        Ok(())
    }

    /// Inner step, s.
    pub fn dt_inner(&self) -> f64 {
        self.outer_dt / f64::from(self.inner_substeps)
    }

    pub fn integrator(&self, scheme: Scheme) -> IntegratorConfig {
        IntegratorConfig {
            scheme,
            dt_inner: self.dt_inner(),
            substeps_per_outer: self.inner_substeps,
        }
    }
}

/// Tank-level description shared by every particle.
#[derive(Debug, Clone)]
pub struct FieldConfig {
    /// Tank liquid volume, m³.
    pub v_tank: f64,
    /// Tank headspace volume, m³. Each particle carries `v_gas / N`.
    pub v_gas: f64,
    /// Tank gas outlet conductance, m³ d⁻¹ bar⁻¹.
    pub k_p: f64,
    pub params: AdmParams,
    pub newton: NewtonConfig,
    pub scheme: Scheme,
}

impl FieldConfig {
    fn validate(&self) -> Result<(), FieldError> {
        for (name, v) in [("V_tank", self.v_tank), ("V_gas", self.v_gas)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FieldError::Config(format!("{name} = {v}")));
            }
        }
        if !(self.k_p >= 0.0 && self.k_p.is_finite()) {
            return Err(FieldError::Config(format!("k_p = {}", self.k_p)));
        }
        Ok(())
    }

    /// Closed reactor of the given liquid and gas volume using the tank's
    /// headspace coefficients, so any sub-volume follows the same equations
    /// bit for bit.
    pub fn closed_reactor(&self, v_liq: f64, v_gas: f64) -> Reactor {
        let config = ReactorConfig {
            v_liq,
            v_gas,
            q_in: 0.0,
            q_out: 0.0,
            k_p: self.k_p * v_gas / self.v_gas,
            inflow: AdmState::zero(),
        };
        Reactor::with_headspace(
            Headspace::new(self.v_tank, self.v_gas, self.k_p),
            config,
            self.params.clone(),
            AlgebraicMode::Dae,
            self.newton,
        )
    }
}

/// Per-particle states keyed by id, kept sorted by id.
#[derive(Debug, Clone)]
pub struct FieldState {
    /// `V_tank / N`, m³.
    pub particle_volume: f64,
    /// s.
    pub time: f64,
    pub ids: Vec<u64>,
    pub positions: Vec<[f64; 3]>,
    pub states: Vec<AdmState>,
    pub stats: StepStats,
    scheme: Scheme,
    reactor: Reactor,
}

/// `V_tank / N` with no other rounding.
pub fn particle_volume(v_tank: f64, n: usize) -> f64 {
    v_tank / n as f64
}

/// Permutation that orders `snap` by id.
fn order_by_id(snap: &ParticleSnapshot) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..snap.particles.len()).collect();
    idx.sort_unstable_by_key(|&k| snap.particles[k].id);
    idx
}

pub fn init_field(
    snapshot: &ParticleSnapshot,
    cfg: &FieldConfig,
    initial: &AdmState,
) -> Result<FieldState, FieldError> {
    cfg.validate()?;
    if snapshot.particles.is_empty() {
        return Err(SnapshotError::Empty.into());
    }
    let n = snapshot.particles.len();
    let v_p = particle_volume(cfg.v_tank, n);
    let reactor = cfg.closed_reactor(v_p, cfg.v_gas / n as f64);
    let y0 = reactor.consistent(initial).map_err(|source| FieldError::Particle {
        id: snapshot.particles[0].id,
        source: SimulationError { time_d: 0.0, source },
    })?;
    let order = order_by_id(snapshot);
    Ok(FieldState {
        particle_volume: v_p,
        time: snapshot.time,
        ids: order.iter().map(|&k| snapshot.particles[k].id).collect(),
        positions: order.iter().map(|&k| snapshot.particles[k].position).collect(),
        states: vec![y0; n],
        stats: StepStats::default(),
        scheme: cfg.scheme,
        reactor,
    })
}

impl FieldState {
    /// `n` particles with ids `0..n` at the origin, all in `initial`. For
    /// kernel benchmarks that need no snapshot.
    pub fn uniform(n: usize, cfg: &FieldConfig, initial: &AdmState) -> Result<Self, FieldError> {
        cfg.validate()?;
        if n == 0 {
            return Err(SnapshotError::Empty.into());
        }
        let reactor = cfg.closed_reactor(particle_volume(cfg.v_tank, n), cfg.v_gas / n as f64);
        let y0 = reactor.consistent(initial).map_err(|source| FieldError::Particle {
            id: 0,
            source: SimulationError { time_d: 0.0, source },
        })?;
        Ok(Self {
            particle_volume: particle_volume(cfg.v_tank, n),
            time: 0.0,
            ids: (0..n as u64).collect(),
            positions: vec![[0.0; 3]; n],
            states: vec![y0; n],
            stats: StepStats::default(),
            scheme: cfg.scheme,
            reactor,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn reactor(&self) -> &Reactor {
        &self.reactor
    }

    /// Replace the state of particle `id`, making it algebraically consistent.
    pub fn set_state(&mut self, id: u64, state: &AdmState) -> Result<(), FieldError> {
        let k = self
            .ids
            .binary_search(&id)
            .map_err(|_| FieldError::IdMismatch(format!("no particle {id}")))?;
        self.states[k] = self
            .reactor
            .consistent(state)
            .map_err(|source| FieldError::Particle {
                id,
                source: SimulationError { time_d: self.time / 86_400.0, source },
            })?;
        Ok(())
    }

    pub fn state(&self, id: u64) -> Option<&AdmState> {
        self.ids.binary_search(&id).ok().map(|k| &self.states[k])
    }

    /// Run `policy.inner_substeps` kinetic steps on every particle, without
    /// touching positions or time.
    pub fn step_kinetics(&mut self, policy: &SyncPolicy, engine: &Engine) -> Result<(), FieldError> {
        policy.validate()?;
        let integ = policy.integrator(self.scheme);
        let dt = integ.dt_days();
        let reactor = &self.reactor;
        let t0_days = self.time / 86_400.0;
        let ids = &self.ids;
        let result = engine.for_each_mut(&mut self.states, |k, y, stats: &mut StepStats| {
            for s in 0..policy.inner_substeps {
                step_fixed(y, reactor, dt, &integ, stats).map_err(|source: SolverError| {
                    FieldError::Particle {
                        id: ids[k],
                        source: SimulationError {
                            time_d: t0_days + f64::from(s + 1) * dt,
                            source,
                        },
                    }
                })?;
            }
            Ok(())
        });
        match result {
            Ok(chunks) => {
                for c in &chunks {
                    self.stats.merge(c);
                }
                Ok(())
            }
            Err(ItemFailures { mut failures }) => Err(failures.swap_remove(0).1),
        }
    }

    /// Advance to `snapshot`: check its time and ids, step the kinetics,
    /// then take the new positions.
    pub fn advance(
        &mut self,
        snapshot: &ParticleSnapshot,
        policy: &SyncPolicy,
        engine: &Engine,
    ) -> Result<(), FieldError> {
        policy.validate()?;
        let expected = self.time + policy.outer_dt;
        if (snapshot.time - expected).abs() > TIME_TOLERANCE * expected.abs().max(1.0) {
            return Err(FieldError::TimeGap {
                expected,
                found: snapshot.time,
            });
        }
        if snapshot.particles.len() != self.len() {
            return Err(FieldError::IdMismatch(format!(
                "{} particles in snapshot, {} in field",
                snapshot.particles.len(),
                self.len()
            )));
        }
        let order = order_by_id(snapshot);
        for (k, &j) in order.iter().enumerate() {
            let id = snapshot.particles[j].id;
            if id != self.ids[k] {
                let sorted: Vec<u64> = order.iter().map(|&j| snapshot.particles[j].id).collect();
                let missing = self
                    .ids
                    .iter()
                    .find(|i| sorted.binary_search(i).is_err())
                    .copied()
                    .unwrap_or(self.ids[k]);
                return Err(FieldError::IdMismatch(format!("particle {missing} is missing")));
            }
        }
        self.step_kinetics(policy, engine)?;
        for (k, &j) in order.iter().enumerate() {
            self.positions[k] = snapshot.particles[j].position;
        }
        self.time = snapshot.time;
        Ok(())
    }

    /// Largest absolute difference of any state value between any two
    /// particles.
    pub fn max_pairwise_difference(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..chad_core::N_STATES {
            let (lo, hi) = self.states.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
                let v = y.values()[i];
                (lo.min(v), hi.max(v))
            });
            worst = worst.max(hi - lo);
        }
        worst
    }

    /// Σ_k V_p S_i,k over all particles.
    pub fn total_mass(&self, c: Component) -> f64 {
        self.states.iter().map(|y| self.particle_volume * y[c]).sum()
    }
}

pub const FIELD_MAGIC: &[u8; 8] = b"CHADFLD1";
pub const FIELD_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Binary,
}

/// One row of a field export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRow {
    pub id: u64,
    pub position: [f64; 3],
    pub value: f64,
}

/// Exported component of a field at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExport {
    /// s.
    pub time: f64,
    pub component: String,
    pub rows: Vec<FieldRow>,
}

impl FieldExport {
    pub fn of(field: &FieldState, component: Component) -> Self {
        Self {
            time: field.time,
            component: component.name().to_string(),
            rows: (0..field.len())
                .map(|k| FieldRow {
                    id: field.ids[k],
                    position: field.positions[k],
                    value: field.states[k][component],
                })
                .collect(),
        }
    }

    /// CSV with header `id,x,y,z,<component>`, rows by id.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "id,x,y,z,{}", self.component)?;
        let mut row = String::with_capacity(128);
        for r in &self.rows {
            row.clear();
            let [x, y, z] = r.position;
            let _ = writeln!(row, "{},{x:.16e},{y:.16e},{z:.16e},{:.16e}", r.id, r.value);
            w.write_all(row.as_bytes())?;
        }
        w.flush()
    }

    /// Little-endian: magic `CHADFLD1`, u32 version, f64 time, u32 name
    /// length, name bytes, u64 count, then (u64 id, f64 x, y, z, value).
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut buf = Vec::with_capacity(40 + self.component.len() + 40 * self.rows.len());
        buf.extend_from_slice(FIELD_MAGIC);
        buf.extend_from_slice(&FIELD_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.time.to_le_bytes());
        buf.extend_from_slice(&(self.component.len() as u32).to_le_bytes());
        buf.extend_from_slice(self.component.as_bytes());
        buf.extend_from_slice(&(self.rows.len() as u64).to_le_bytes());
        for r in &self.rows {
            buf.extend_from_slice(&r.id.to_le_bytes());
            for v in [r.position[0], r.position[1], r.position[2], r.value] {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        w.flush()
    }

    pub fn read_binary(b: &[u8]) -> Result<Self, FieldError> {
        let trunc = || FieldError::Snapshot(SnapshotError::Truncated {
            expected: 0,
            found: b.len() as u64,
        });
        let take = |at: usize, n: usize| b.get(at..at + n).ok_or_else(trunc);
        if take(0, 8)? != FIELD_MAGIC {
            return Err(SnapshotError::BadMagic.into());
        }
        let version = u32::from_le_bytes(take(8, 4)?.try_into().expect("4"));
        if version != FIELD_VERSION {
            return Err(SnapshotError::Version {
                found: version,
                expected: FIELD_VERSION,
            }
            .into());
        }
        let time = f64::from_le_bytes(take(12, 8)?.try_into().expect("8"));
        let len = u32::from_le_bytes(take(20, 4)?.try_into().expect("4")) as usize;
        let component = String::from_utf8(take(24, len)?.to_vec())
            .map_err(|e| FieldError::Parse { line: 0, msg: e.to_string() })?;
        let mut at = 24 + len;
        let n = u64::from_le_bytes(take(at, 8)?.try_into().expect("8")) as usize;
        at += 8;
        let body = b.len() - at;
        if body != n.saturating_mul(40) {
            return Err(if body < n.saturating_mul(40) {
                SnapshotError::Truncated {
                    expected: (at + n * 40) as u64,
                    found: b.len() as u64,
                }
            } else {
                SnapshotError::TrailingData((body - n * 40) as u64)
            }
            .into());
        }
        let f = |at: usize| f64::from_le_bytes(b[at..at + 8].try_into().expect("8"));
        let rows = b[at..]
            .chunks_exact(40)
            .enumerate()
            .map(|(k, _)| {
                let o = at + 40 * k;
                FieldRow {
                    id: u64::from_le_bytes(b[o..o + 8].try_into().expect("8")),
                    position: [f(o + 8), f(o + 16), f(o + 24)],
                    value: f(o + 32),
                }
            })
            .collect();
        Ok(Self { time, component, rows })
    }

    /// Parse a CSV export; the time is not part of the CSV and is set to 0.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, FieldError> {
        let mut lines = r.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        let component = header
            .strip_prefix("id,x,y,z,")
            .ok_or_else(|| FieldError::Parse { line: 1, msg: "bad field header".into() })?
            .to_string();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 2;
            let bad = |msg: String| FieldError::Parse { line: lineno, msg };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(bad(format!("expected 5 columns, found {}", cols.len())));
            }
            let id = cols[0].parse::<u64>().map_err(|e| bad(e.to_string()))?;
            let mut v = [0.0; 4];
            for (k, c) in cols[1..].iter().enumerate() {
                v[k] = c.parse::<f64>().map_err(|e| bad(e.to_string()))?;
            }
            rows.push(FieldRow {
                id,
                position: [v[0], v[1], v[2]],
                value: v[3],
            });
        }
        Ok(Self { time: 0.0, component, rows })
    }
}

/// Write `component` of `field` to `path`.
pub fn export_field(
    field: &FieldState,
    component: Component,
    path: &Path,
    format: ExportFormat,
) -> std::io::Result<()> {
    let w = std::io::BufWriter::with_capacity(1 << 20, std::fs::File::create(path)?);
    let e = FieldExport::of(field, component);
    match format {
        ExportFormat::Csv => e.write_csv(w),
        ExportFormat::Binary => e.write_binary(w),
    }
}
