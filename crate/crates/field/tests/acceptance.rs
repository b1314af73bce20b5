//! Acceptance suite. Runs every criterion in sequence (they are heavy and
//! memory-hungry) and prints one PASS/FAIL line each. Pass criterion
//! numbers as arguments to run a subset, e.g.
//! `cargo test -p chad-field --test acceptance -- 2 9`.

use std::collections::BTreeSet;
use std::time::Instant;

use chad_core::integrate::{step_fixed, Scheme, StepStats};
use chad_core::params::HillForm;
use chad_core::reactor::{stride_for, AlgebraicMode, Series};
use chad_core::solver::{charge_balance_residual, InitialGuess};
use chad_core::stoichiometry::Process;
use chad_core::{
    inhibition, presets as tank, relative_rmse, solve_proton, AdmParams, AdmState, Component,
    IntegratorConfig, NewtonConfig, N_STATES,
};
use chad_field::bench::{bench_scaling, BenchWorkload};
use chad_field::engine::{physical_cores, Engine};
use chad_field::generate::{snapshot_times, RotatingCloud};
use chad_field::presets as lab;
use chad_field::snapshot::{
    decode_binary, encode_binary, load_snapshot_ascii, load_snapshot_binary, read_snapshot_ascii,
    save_snapshot_ascii, save_snapshot_binary, write_snapshot_ascii, Particle, ParticleSnapshot,
};
use chad_field::{init_field, FieldState};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances.
const C1_MAX_RMSE_PERCENT: f64 = 0.5;
const C1_EULER_DT_S: f64 = 0.05;
const C1_ORACLE_DT_S: f64 = 8.64;
const C1_DAYS: f64 = 60.0;
const C1_RECORD_DAYS: f64 = 0.01;
const C2_MAX_RESIDUAL: f64 = 1e-12;
const C2_CASES: usize = 1000;
const C2_MAX_REL_DIFF: f64 = 1e-12;
const C3_MAX_REL_DIFF: f64 = 0.01;
const C3_ODE_DT_DAYS: f64 = 1e-6;
const C3_ODE_DAYS: f64 = 0.05;
const C3_MAX_PH_DIFF: f64 = 0.01;
const C4_PARTICLES: usize = 10_000;
const C5_WORKERS: [usize; 4] = [1, 2, 4, 8];
const C5_CASE1_PARTICLES: usize = 64;
const C5_CASE1_DAYS: f64 = 0.01;
const C6_SIZES: [usize; 4] = [10_000, 100_000, 500_000, 1_000_000];
const C6_REPETITIONS: usize = 5;
const C6_MIN_R2: f64 = 0.98;
const C6_MIN_SPEEDUP: f64 = 4.0;
const C7_PARTICLES: usize = 1_000_000;
const C7_MIN_READ_RATIO: f64 = 5.0;
const C8_CASES: u32 = 10_000;
const C9_MAX_COD_IMBALANCE: f64 = 1e-12;

struct Outcome {
    id: &'static str,
    pass: bool,
    /// Failure does not fail the suite (documented hardware limit).
    gating: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome {
        id,
        pass,
        gating: true,
        detail,
    }
}

fn report(o: &Outcome, secs: f64) {
    let status = if o.pass { "PASS" } else { "FAIL" };
    let note = if !o.pass && !o.gating { " (non-gating)" } else { "" };
    println!("criterion {:<3} {status}{note}  {}  [{secs:.1} s]", o.id, o.detail);
}

fn bits(y: &AdmState) -> Vec<u64> {
    y.values()
        .iter()
        .map(|v| v.to_bits())
        .chain([y.s_h().to_bits()])
        .collect()
}

// ---- criteria 1 and 2 --------------------------------------------------

fn criterion_1_and_2a() -> Vec<Outcome> {
    let reactor = tank::case1_reactor(AlgebraicMode::Dae).unwrap();
    let init = tank::bsm2_initial_state();
    let euler = IntegratorConfig {
        scheme: Scheme::FixedEuler,
        dt_inner: C1_EULER_DT_S,
        substeps_per_outer: 1,
    };
    let oracle = IntegratorConfig {
        scheme: Scheme::FixedRk4Oracle,
        dt_inner: C1_ORACLE_DT_S,
        substeps_per_outer: 1,
    };
    let (cand, stats) = reactor
        .simulate(&init, C1_DAYS, &euler, stride_for(C1_RECORD_DAYS, euler.dt_days()))
        .unwrap();
    let (reference, _) = reactor
        .simulate(&init, C1_DAYS, &oracle, stride_for(C1_RECORD_DAYS, oracle.dt_days()))
        .unwrap();

    let mut worst = (String::new(), 0.0f64);
    let mut all_ok = true;
    let series = Component::ALL
        .iter()
        .map(|c| Series::State(*c))
        .chain([Series::Ph]);
    for s in series {
        let e = relative_rmse(&cand, &reference, s).unwrap();
        all_ok &= e <= C1_MAX_RMSE_PERCENT;
        if e > worst.1 || worst.0.is_empty() {
            worst = (s.name().to_string(), e);
        }
    }
    let ph = relative_rmse(&cand, &reference, Series::Ph).unwrap();
    let c1 = outcome(
        "1",
        all_ok,
        format!(
            "Euler {C1_EULER_DT_S} s vs RK4 {C1_ORACLE_DT_S} s over {C1_DAYS} d, {} samples: \
             worst relative RMSE {} = {:.3e} %, pH {:.3e} % (tol {C1_MAX_RMSE_PERCENT} %)",
            cand.len(),
            worst.0,
            worst.1,
            ph
        ),
    );
    let c2a = outcome(
        "2a",
        stats.proton_solves > 0 && stats.max_proton_residual <= C2_MAX_RESIDUAL,
        format!(
            "max |E(S_H)| over {} proton solves in the criterion 1 run = {:.2e} (tol {C2_MAX_RESIDUAL:e})",
            stats.proton_solves, stats.max_proton_residual
        ),
    );
    vec![c1, c2a]
}

/// Charge balance written out independently of the library.
fn charge(h: f64, y: &AdmState, p: &AdmParams) -> f64 {
    use Component::*;
    let dis = |ka: f64, tot: f64| ka * tot / (ka + h);
    y[SCat] + (y[SIn] - dis(p.ka_in, y[SIn])) + h
        - dis(p.ka_co2, y[SIc])
        - dis(p.ka_ac, y[SAc]) / 64.0
        - dis(p.ka_pro, y[SPro]) / 112.0
        - dis(p.ka_bu, y[SBu]) / 160.0
        - dis(p.ka_va, y[SVa]) / 208.0
        - p.kw / h
        - y[SAn]
}

/// Geometric bisection until the bracket cannot shrink further.
fn bisect(y: &AdmState, p: &AdmParams) -> f64 {
    let (mut lo, mut hi) = (1e-16f64, 10.0f64);
    assert!(charge(lo, y, p) < 0.0 && charge(hi, y, p) > 0.0);
    for _ in 0..2000 {
        let mid = if hi / lo > 1.5 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if charge(mid, y, p) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if charge(lo, y, p).abs() < charge(hi, y, p).abs() {
        lo
    } else {
        hi
    }
}

fn criterion_2b() -> Outcome {
    use Component::*;
    let p = tank::case1_params();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
        (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
    };
    let mut worst = 0.0f64;
    let mut worst_residual = 0.0f64;
    for case in 0..C2_CASES {
        let mut y = AdmState::zero();
        y[SIc] = log_uniform(&mut rng, 1e-3, 0.2);
        y[SIn] = log_uniform(&mut rng, 1e-3, 0.2);
        for c in [SAc, SPro, SBu, SVa] {
            y[c] = log_uniform(&mut rng, 1e-4, 2.0);
        }
        y[SCat] = rng.gen::<f64>() * 0.1;
        y[SAn] = rng.gen::<f64>() * 0.1;
        let guess = [InitialGuess::PreviousValue, InitialGuess::NeutralPh, InitialGuess::Midpoint][case % 3];
        y.set_s_h(log_uniform(&mut rng, 1e-10, 1e-4));
        let cfg = NewtonConfig {
            initial_guess: guess,
            ..Default::default()
        };
        let reference = bisect(&y, &p);
        let root = solve_proton(&mut y, &p, &cfg).unwrap();
        let rel = (y.s_h() - reference).abs() / reference;
        worst = worst.max(rel);
        worst_residual = worst_residual.max(charge_balance_residual(y.s_h(), &y, &p).unwrap().abs());
        assert_eq!(root.x, y.s_h());
    }
    outcome(
        "2b",
        worst <= C2_MAX_REL_DIFF && worst_residual <= C2_MAX_RESIDUAL,
        format!(
            "{C2_CASES} random ion totals: max |Newton - bisection| / bisection = {worst:.2e} \
             (tol {C2_MAX_REL_DIFF:e}), max |E| = {worst_residual:.2e}"
        ),
    )
}

// ---- criterion 3 -------------------------------------------------------

/// Backward Euler on the ODE-mode system: full Newton on
/// `y - y_n - dt f(y) = 0` with a finite-difference Jacobian, halving the
/// step when Newton stalls. Explicit schemes are unstable at this step: k_ab
/// couples the buffer ions to S_H with an eigenvalue near 5e7 d⁻¹.
fn backward_euler_step(sys: &chad_core::Reactor, y: &mut AdmState, dt: f64, depth: u32) {
    use chad_core::integrate::DaeSystem;
    use nalgebra::{DMatrix, DVector};
    let f = |z: &AdmState| {
        let mut z = *z;
        sys.project(&mut z, &mut StepStats::default()).unwrap();
        DVector::from_column_slice(&sys.derivative(&z).unwrap())
    };
    let yn = DVector::from_column_slice(y.values());
    let mut z = *y;
    for _ in 0..12 {
        let fz = f(&z);
        let mut jac = DMatrix::<f64>::identity(N_STATES, N_STATES);
        for j in 0..N_STATES {
            let h = 1e-7 * z.values()[j].abs().max(1e-9);
            let mut zp = z;
            zp.values_mut()[j] += h;
            let col = (f(&zp) - &fz) / h;
            for i in 0..N_STATES {
                jac[(i, j)] -= dt * col[i];
            }
        }
        let cur = DVector::from_column_slice(z.values());
        let g = &cur - &yn - dt * fz;
        let delta = jac.lu().solve(&g).expect("non-singular iteration matrix");
        for (v, d) in z.values_mut().iter_mut().zip(delta.iter()) {
            *v -= d;
        }
        let converged = delta
            .iter()
            .zip(cur.iter())
            .all(|(d, c)| d.abs() <= 1e-10 * c.abs().max(1e-10));
        if converged {
            sys.project(&mut z, &mut StepStats::default()).unwrap();
            *y = z;
            return;
        }
    }
    assert!(depth < 30, "backward Euler cannot converge at dt {dt:e} d");
    backward_euler_step(sys, y, 0.5 * dt, depth + 1);
    backward_euler_step(sys, y, 0.5 * dt, depth + 1);
}

fn criterion_3() -> Outcome {
    let dae = tank::case1_reactor(AlgebraicMode::Dae).unwrap();
    let coarse = IntegratorConfig {
        dt_inner: 10.0,
        ..Default::default()
    };
    let (t, _) = dae
        .simulate(&tank::bsm2_initial_state(), 400.0, &coarse, u64::MAX)
        .unwrap();
    let steady = *t.last().unwrap();
    let ode = tank::case1_reactor(AlgebraicMode::Ode).unwrap();
    // start off the manifold so the ODE has to find its own steady state
    let mut de = ode.consistent(&steady).unwrap();
    de[Component::SH2] *= 2.0;
    for ion in Component::IONS {
        de[ion] *= 0.98;
    }
    let steps = (C3_ODE_DAYS / C3_ODE_DT_DAYS).round() as usize;
    for _ in 0..steps {
        backward_euler_step(&ode, &mut de, C3_ODE_DT_DAYS, 0);
    }
    let s_dae = steady[Component::SH2];
    let s_de = de[Component::SH2];
    let rel = (s_de - s_dae).abs() / s_dae;
    let ph_diff = (de.ph() - steady.ph()).abs();
    outcome(
        "3",
        rel <= C3_MAX_REL_DIFF && ph_diff <= C3_MAX_PH_DIFF,
        format!(
            "steady S_h2: algebraic {s_dae:.6e}, stiff ODE relaxed from a perturbed start \
             (backward Euler, dt {C3_ODE_DT_DAYS:e} d, {C3_ODE_DAYS} d) {s_de:.6e}, relative difference {rel:.2e} \
             (tol {C3_MAX_REL_DIFF}); |delta pH| {ph_diff:.1e} (tol {C3_MAX_PH_DIFF})"
        ),
    )
}

// ---- criteria 4 and 5 --------------------------------------------------

/// Uniform Case-2-shaped field run through 200 s of synthetic snapshots.
fn run_lab_field(workers: usize) -> FieldState {
    let cloud = RotatingCloud::new(C4_PARTICLES, lab::case2_cylinder(), 4);
    let policy = lab::case2_policy();
    let times = snapshot_times(lab::CASE2_DURATION, policy.outer_dt);
    let engine = Engine::new(workers).unwrap();
    let mut field = init_field(
        &cloud.snapshot_at(times[0]),
        &lab::case2_field_config(),
        &tank::bsm2_initial_state(),
    )
    .unwrap();
    for &t in &times[1..] {
        field.advance(&cloud.snapshot_at(t), &policy, &engine).unwrap();
    }
    field
}

fn criterion_4(field: &FieldState) -> Outcome {
    let cfg = lab::case2_field_config();
    let policy = lab::case2_policy();
    let single = cfg.closed_reactor(cfg.v_tank, cfg.v_gas);
    let integ = policy.integrator(Scheme::FixedEuler);
    let (t, _) = single
        .simulate(
            &tank::bsm2_initial_state(),
            lab::CASE2_DURATION / 86_400.0,
            &integ,
            u64::MAX,
        )
        .unwrap();
    let reference = *t.last().unwrap();
    let spread = field.max_pairwise_difference();
    let all_equal = field.states.iter().all(|y| bits(y) == bits(&reference));
    let mass_rel = Component::ALL
        .iter()
        .filter(|c| reference[**c] != 0.0)
        .map(|c| (field.total_mass(*c) - cfg.v_tank * reference[*c]).abs() / (cfg.v_tank * reference[*c]).abs())
        .fold(0.0f64, f64::max);
    outcome(
        "4",
        spread == 0.0 && all_equal && field.time == lab::CASE2_DURATION,
        format!(
            "{} particles, {} s, {} steps: max pairwise difference {spread:e}, every particle \
             bit-identical to the N = 1 closed tank: {all_equal}; tracked mass vs tank relative {mass_rel:.1e}",
            field.len(),
            field.time,
            field.stats.steps
        ),
    )
}

fn case1_particle_set(workers: usize) -> Vec<AdmState> {
    let reactor = tank::case1_reactor(AlgebraicMode::Dae).unwrap();
    let base = tank::bsm2_initial_state();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut states: Vec<AdmState> = (0..C5_CASE1_PARTICLES)
        .map(|_| {
            let mut y = base;
            for v in y.values_mut()[..26].iter_mut() {
                *v *= 1.0 + 0.2 * (rng.gen::<f64>() - 0.5);
            }
            reactor.consistent(&y).unwrap()
        })
        .collect();
    let integ = IntegratorConfig {
        dt_inner: C1_EULER_DT_S,
        ..Default::default()
    };
    let dt = integ.dt_days();
    let steps = (C5_CASE1_DAYS / dt).round() as u64;
    Engine::new(workers)
        .unwrap()
        .for_each_mut(&mut states, |_, y, stats: &mut StepStats| {
            for _ in 0..steps {
                step_fixed(y, &reactor, dt, &integ, stats)?;
            }
            Ok::<_, chad_core::SolverError>(())
        })
        .unwrap();
    states
}

fn criterion_5(lab_w1: &FieldState) -> Outcome {
    let reference: Vec<Vec<u64>> = case1_particle_set(1).iter().map(bits).collect();
    let mut case1_ok = true;
    for &w in &C5_WORKERS[1..] {
        case1_ok &= case1_particle_set(w).iter().map(bits).collect::<Vec<_>>() == reference;
    }
    let lab_ref: Vec<Vec<u64>> = lab_w1.states.iter().map(bits).collect();
    let mut lab_ok = true;
    for &w in &C5_WORKERS[1..] {
        let f = run_lab_field(w);
        lab_ok &= f.ids == lab_w1.ids && f.states.iter().map(bits).collect::<Vec<_>>() == lab_ref;
    }
    outcome(
        "5",
        case1_ok && lab_ok,
        format!(
            "W in {C5_WORKERS:?}: Case 1 set ({C5_CASE1_PARTICLES} tanks, {C5_CASE1_DAYS} d) \
             bit-identical: {case1_ok}; criterion 4 field bit-identical: {lab_ok}"
        ),
    )
}

// ---- criterion 6 -------------------------------------------------------

fn criterion_6() -> Vec<Outcome> {
    let cores = physical_cores();
    let mut workers = vec![1];
    if cores > 1 {
        workers.push(cores);
    }
    let workload = BenchWorkload {
        field: lab::case2_field_config(),
        policy: lab::case2_policy(),
        initial: tank::bsm2_initial_state(),
    };
    let report = bench_scaling(&C6_SIZES, &workers, C6_REPETITIONS, &workload).unwrap();
    let mut r2_ok = true;
    let mut fits = Vec::new();
    for &w in &workers {
        let f = report.fit(w).unwrap();
        r2_ok &= f.r_squared >= C6_MIN_R2;
        fits.push(format!("W={w}: R^2 {:.5}, {:.3e} s/particle", f.r_squared, f.slope));
    }
    let largest = *C6_SIZES.last().unwrap();
    let speedup = report.cell(largest, cores).map(|c| c.speedup).unwrap_or(1.0);
    let timings: Vec<String> = report
        .cells
        .iter()
        .filter(|c| c.workers == 1)
        .map(|c| format!("{}:{:.3}s", c.n_particles, c.mean_runtime))
        .collect();
    let c6a = outcome(
        "6a",
        r2_ok,
        format!(
            "one outer step, R = {C6_REPETITIONS}, N = {C6_SIZES:?}: {} (tol R^2 >= {C6_MIN_R2}); W=1 means {}",
            fits.join("; "),
            timings.join(" ")
        ),
    );
    let pass = speedup >= C6_MIN_SPEEDUP;
    let c6b = Outcome {
        id: "6b",
        pass,
        // a speedup of 4 is unreachable with fewer than 4 physical cores
        gating: cores >= C6_MIN_SPEEDUP as usize,
        detail: format!(
            "speedup at W = physical cores = {cores}, N = {largest}: {speedup:.2}x (tol >= {C6_MIN_SPEEDUP}x)"
        ),
    };
    vec![c6a, c6b]
}

// ---- criterion 7 -------------------------------------------------------

fn extreme_corpus() -> Vec<ParticleSnapshot> {
    let specials = [
        0.0,
        -0.0,
        f64::MAX,
        f64::MIN,
        f64::MIN_POSITIVE,
        -f64::MIN_POSITIVE,
        5e-324,
        -5e-324,
        1e-300,
        -1e300,
        std::f64::consts::PI,
        1.0 / 3.0,
        0.1,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();
    for s in 0..5 {
        let n = 1 + 200 * s;
        let particles = (0..n)
            .map(|k| {
                let mut f = [0.0; 7];
                for v in f.iter_mut() {
                    *v = if rng.gen::<f64>() < 0.3 {
                        specials[rng.gen_range(0..specials.len())]
                    } else {
                        f64::from_bits(rng.gen::<u64>() & !(0x7ff << 52) | (rng.gen_range(1..0x7ff) << 52))
                    };
                }
                Particle {
                    id: if k % 2 == 0 { u64::MAX - k as u64 } else { k as u64 },
                    position: [f[0], f[1], f[2]],
                    velocity: [f[3], f[4], f[5]],
                    density: f[6],
                }
            })
            .collect();
        out.push(ParticleSnapshot::new(specials[s % specials.len()], particles).unwrap());
    }
    out
}

fn snapshot_bits(s: &ParticleSnapshot) -> Vec<u64> {
    let mut b = vec![s.time.to_bits(), s.particles.len() as u64];
    for p in &s.particles {
        b.push(p.id);
        b.extend(p.position.iter().chain(&p.velocity).chain([&p.density]).map(|v| v.to_bits()));
    }
    b
}

fn criterion_7() -> Outcome {
    let mut lossless = true;
    for s in extreme_corpus() {
        let bin = decode_binary(&encode_binary(&s)).unwrap();
        let mut text = Vec::new();
        write_snapshot_ascii(&bin, &mut text).unwrap();
        let ascii = read_snapshot_ascii(text.as_slice()).unwrap();
        let back = decode_binary(&encode_binary(&ascii)).unwrap();
        lossless &= snapshot_bits(&bin) == snapshot_bits(&s)
            && snapshot_bits(&ascii) == snapshot_bits(&s)
            && snapshot_bits(&back) == snapshot_bits(&s);
    }

    let dir = tempfile::tempdir().unwrap();
    let ascii_path = dir.path().join("large.csv");
    let bin_path = dir.path().join("large.bin");
    let snap = RotatingCloud::new(C7_PARTICLES, lab::case2_cylinder(), 11).snapshot_at(0.5);
    save_snapshot_ascii(&snap, &ascii_path).unwrap();
    save_snapshot_binary(&snap, &bin_path).unwrap();
    let time = |f: &dyn Fn() -> ParticleSnapshot| {
        let t0 = Instant::now();
        let s = f();
        (t0.elapsed().as_secs_f64(), s)
    };
    // best of three to damp page-cache and allocator noise
    let mut t_ascii = f64::INFINITY;
    let mut t_bin = f64::INFINITY;
    let mut same = true;
    for _ in 0..3 {
        let (ta, a) = time(&|| load_snapshot_ascii(&ascii_path).unwrap());
        let (tb, b) = time(&|| load_snapshot_binary(&bin_path).unwrap());
        t_ascii = t_ascii.min(ta);
        t_bin = t_bin.min(tb);
        same &= snapshot_bits(&a) == snapshot_bits(&b) && snapshot_bits(&b) == snapshot_bits(&snap);
    }
    let ratio = t_ascii / t_bin;
    outcome(
        "7",
        lossless && same && ratio >= C7_MIN_READ_RATIO,
        format!(
            "extreme-value corpus round trips exact: {lossless}; {C7_PARTICLES} particles: ASCII read \
             {t_ascii:.3} s, binary read {t_bin:.3} s, ratio {ratio:.1}x (tol >= {C7_MIN_READ_RATIO}x), same data: {same}"
        ),
    )
}

// ---- criterion 8 -------------------------------------------------------

fn criterion_8() -> Outcome {
    let cfg = Config {
        cases: C8_CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let limits = (0.5f64..13.0, 0.1f64..5.0, 0.1f64..8.0);
    let mut failures = Vec::new();
    let mut check = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };

    let mut runner = TestRunner::new(cfg.clone());
    check(
        "hill (pH)",
        runner
            .run(&(limits.clone(), 0.01f64..14.0, 0.0f64..1.0), |((ll, w, n), ph, frac)| {
                let ul = ll + w;
                let k = 0.5 * (ll + ul);
                prop_assert_eq!(inhibition::hill_inhibition(k, ll, ul, n).unwrap(), 0.5);
                let a = inhibition::hill_inhibition(ph, ll, ul, n).unwrap();
                let b = inhibition::hill_inhibition(ph + frac, ll, ul, n).unwrap();
                prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
                prop_assert!(a <= b, "not increasing in pH");
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    let mut runner = TestRunner::new(cfg.clone());
    check(
        "hill (S_H)",
        runner
            .run(&(limits, -14.0f64..0.0, 0.0f64..2.0), |((ll, w, n), log_h, dlog)| {
                let ul = ll + w;
                let k = 10f64.powf(-0.5 * (ll + ul));
                prop_assert_eq!(inhibition::hill_inhibition_proton(k, ll, ul, n).unwrap(), 0.5);
                let a = inhibition::hill_inhibition_proton(10f64.powf(log_h), ll, ul, n).unwrap();
                let b = inhibition::hill_inhibition_proton(10f64.powf(log_h + dlog), ll, ul, n).unwrap();
                prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
                prop_assert!(a >= b, "not decreasing in S_H");
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    let mut runner = TestRunner::new(cfg.clone());
    check(
        "non-competitive",
        runner
            .run(&(1e-9f64..10.0, 0.0f64..100.0, 0.0f64..100.0), |(k, s, ds)| {
                prop_assert_eq!(inhibition::noncompetitive_inhibition(k, k).unwrap(), 0.5);
                let a = inhibition::noncompetitive_inhibition(s, k).unwrap();
                let b = inhibition::noncompetitive_inhibition(s + ds, k).unwrap();
                prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
                prop_assert!(a >= b, "not decreasing in S_I");
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    let mut runner = TestRunner::new(cfg);
    check(
        "substrate limitation",
        runner
            .run(&(1e-9f64..10.0, 0.0f64..100.0, 0.0f64..100.0), |(k, s, ds)| {
                prop_assert_eq!(inhibition::substrate_limitation(k, k).unwrap(), 0.5);
                let a = inhibition::substrate_limitation(s, k).unwrap();
                let b = inhibition::substrate_limitation(s + ds, k).unwrap();
                prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
                prop_assert!(a <= b, "not increasing in S_I");
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    // Both switch forms as used by the kinetics.
    let p = AdmParams::default_at(308.5, 1.013).with_hill_form(HillForm::Ph);
    let half = p.hill_ac.factor(10f64.powf(-p.hill_ac.midpoint_ph()));
    if (half - 0.5).abs() > 1e-15 {
        failures.push(format!("pH-form switch at K_pH gives {half}"));
    }
    outcome(
        "8",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{C8_CASES} cases each for 4 functions: half points, range [0,1], monotonicity hold")
        } else {
            failures.join("; ")
        },
    )
}

// ---- criterion 9 -------------------------------------------------------

fn criterion_9() -> Outcome {
    use Component::*;
    let cod = [
        SSu, SAa, SFa, SVa, SBu, SPro, SAc, SH2, SCh4, SI, Xc, XCh, XPr, XLi, XSu, XAa, XFa, XC4,
        XPro, XAc, XH2, XI,
    ];
    let p = tank::case1_params();
    let mut worst = (Process::Disintegration, 0.0f64);
    for proc in Process::ALL {
        let sum: f64 = cod.iter().map(|c| p.stoich.coef(proc, *c)).sum();
        if sum.abs() >= worst.1 {
            worst = (proc, sum.abs());
        }
    }
    outcome(
        "9",
        worst.1 <= C9_MAX_COD_IMBALANCE,
        format!(
            "largest |sum of COD coefficients| over all {} processes: {:.1e} ({:?}) (tol {C9_MAX_COD_IMBALANCE:e})",
            Process::ALL.len(),
            worst.1,
            worst.0
        ),
    )
}

fn main() {
    let selected: BTreeSet<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let want = |n: &str| selected.is_empty() || selected.contains(n);
    println!("acceptance suite ({} physical cores)", physical_cores());
    let mut outcomes = Vec::new();
    let mut timed = |f: &mut dyn FnMut() -> Vec<Outcome>| {
        let t0 = Instant::now();
        let os = f();
        let secs = t0.elapsed().as_secs_f64();
        for o in &os {
            report(o, secs);
        }
        outcomes.extend(os);
    };
    if want("1") || want("2") {
        timed(&mut criterion_1_and_2a);
    }
    if want("2") {
        timed(&mut || vec![criterion_2b()]);
    }
    if want("3") {
        timed(&mut || vec![criterion_3()]);
    }
    if want("4") || want("5") {
        let lab = run_lab_field(1);
        if want("4") {
            timed(&mut || vec![criterion_4(&lab)]);
        }
        if want("5") {
            timed(&mut || vec![criterion_5(&lab)]);
        }
    }
    if want("6") {
        timed(&mut criterion_6);
    }
    if want("7") {
        timed(&mut || vec![criterion_7()]);
    }
    if want("8") {
        timed(&mut || vec![criterion_8()]);
    }
    if want("9") {
        timed(&mut || vec![criterion_9()]);
    }
    let gating_failures: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.pass && o.gating)
        .map(|o| o.id)
        .collect();
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!(
        "acceptance: {passed}/{} passed, gating failures: {:?}",
        outcomes.len(),
        gating_failures
    );
    if !gating_failures.is_empty() {
        std::process::exit(1);
    }
    let _ = N_STATES;
}
