use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chad_core::reactor::stride_for;
use chad_core::{relative_rmse, AlgebraicMode, Component, Reactor, Series, Trajectory, N_STATES};
use chad_field::bench::{bench_scaling, BenchWorkload};
use chad_field::field::{export_field, ExportFormat};
use chad_field::generate::{snapshot_times, CylinderSpec, RotatingCloud};
use chad_field::snapshot::{load_snapshot, save_snapshot, SnapshotFormat};
use chad_field::{init_field, Engine, FieldState, ParticleSnapshot};

use crate::config::{Case, FileFormat, RunConfig};
use crate::error::{CliError, ExitClass};
use crate::external::read_external;

/// Explicit steps in ODE mode above this (d) are unstable: k_ab couples the
/// buffer ions to S_H with an eigenvalue near 5e7 d⁻¹.
const ODE_EXPLICIT_DT_LIMIT_DAYS: f64 = 5e-8;

/// Column order of the comparison table.
pub const COMPARE_DEFAULT: [&str; 8] = ["X_c", "X_ch", "S_su", "S_bu", "S_ac", "S_ch4", "G_ch4", "pH"];

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::from(e).in_file(dir))?;
    }
    let f = File::create(path).map_err(|e| CliError::from(e).in_file(path))?;
    Ok(BufWriter::with_capacity(1 << 20, f))
}

fn require_case(cfg: &RunConfig, case: Case) -> Result<(), CliError> {
    if cfg.case != case {
        return Err(CliError::config(format!(
            "configuration is for case `{:?}`, this command runs `{case:?}`",
            cfg.case
        )));
    }
    Ok(())
}

/// Largest |dy/dt| / max(|y|, 1e-6) over the differential states, d⁻¹.
fn stationarity(reactor: &Reactor, traj: &Trajectory) -> f64 {
    let Some(y) = traj.last() else { return f64::NAN };
    let d = reactor.rhs(y).d;
    (0..N_STATES)
        .filter(|&i| {
            let c = Component::ALL[i];
            reactor.mode == AlgebraicMode::Ode || (c != Component::SH2 && !Component::IONS.contains(&c))
        })
        .map(|i| d[i].abs() / y.values()[i].abs().max(1e-6))
        .fold(0.0, f64::max)
}

pub fn run_cstr(cfg: &RunConfig) -> Result<(), CliError> {
    require_case(cfg, Case::Cstr)?;
    cfg.validate()?;
    let s = cfg.cstr()?;
    let reactor = Reactor::new(cfg.reactor_config()?, cfg.params()?, s.mode, cfg.solver)?;
    let integ = cfg.integrator_config();
    if s.mode == AlgebraicMode::Ode && integ.dt_days() > ODE_EXPLICIT_DT_LIMIT_DAYS {
        eprintln!(
            "warning: ODE mode with an explicit step of {} s is likely unstable; use dt <= {:.1e} s",
            integ.dt_inner,
            ODE_EXPLICIT_DT_LIMIT_DAYS * chad_core::integrate::SECONDS_PER_DAY
        );
    }
    let initial = cfg.initial_state()?;
    let stride = stride_for(s.record_interval_days, integ.dt_days());
    let t0 = Instant::now();
    let (traj, stats) = reactor.simulate(&initial, s.duration_days, &integ, stride)?;
    let wall = t0.elapsed().as_secs_f64();

    let mut summary: Box<dyn Write> = match &cfg.paths.output {
        Some(path) => {
            let mut w = create(path)?;
            traj.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::from(e).in_file(path))?;
            Box::new(std::io::stdout())
        }
        None => {
            let mut out = std::io::stdout().lock();
            traj.write_csv(&mut out)?;
            Box::new(std::io::stderr())
        }
    };
    let y = traj.last().expect("initial row is always recorded");
    let t_end = *traj.times.last().expect("non-empty");
    let w = &mut summary;
    writeln!(w, "run-cstr: {} rows, t = {t_end} d, {} steps in {wall:.2} s", traj.len(), stats.steps)?;
    writeln!(
        w,
        "final: pH {:.6}, q_gas {:.6e} m3/d, S_ac {:.6e}, S_ch4 {:.6e}, S_gas_ch4 {:.6e}, S_h2 {:.6e}",
        y.ph(),
        traj.gas_flow.last().copied().unwrap_or(f64::NAN),
        y[Component::SAc],
        y[Component::SCh4],
        y[Component::SGasCh4],
        y[Component::SH2]
    )?;
    if stats.proton_solves > 0 {
        writeln!(
            w,
            "solver: {} proton solves (max |E| {:.2e}), {} hydrogen solves (max residual {:.2e}), {:.2} Newton iterations per solve, {} clamped values",
            stats.proton_solves,
            stats.max_proton_residual,
            stats.hydrogen_solves,
            stats.max_hydrogen_residual,
            stats.newton_iterations as f64 / (stats.proton_solves + stats.hydrogen_solves) as f64,
            stats.clamped
        )?;
    }
    let r = stationarity(&reactor, &traj);
    writeln!(
        w,
        "steady-state check: max |dy/dt| / |y| = {r:.3e} 1/d ({})",
        if r < 1e-6 { "stationary" } else { "still evolving" }
    )?;
    Ok(())
}

/// Regular files of `dir`, sorted by name, hidden files skipped.
fn snapshot_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::from(e).in_file(dir))? {
        let entry = entry?;
        let name = entry.file_name();
        if entry.file_type()?.is_file() && !name.to_string_lossy().starts_with('.') {
            files.push(entry.path());
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::new(ExitClass::Io, "no snapshot files").in_file(dir));
    }
    Ok(files)
}

fn export_all(
    field: &FieldState,
    components: &[Component],
    dir: &Path,
    step: usize,
    format: FileFormat,
) -> Result<(), CliError> {
    let (fmt, ext) = match format {
        FileFormat::Csv => (ExportFormat::Csv, "csv"),
        FileFormat::Binary => (ExportFormat::Binary, "bin"),
    };
    for c in components {
        let path = dir.join(format!("field_{step:06}_{}.{ext}", c.name()));
        export_field(field, *c, &path, fmt).map_err(|e| CliError::from(e).in_file(&path))?;
    }
    Ok(())
}

pub fn run_field(cfg: &RunConfig) -> Result<(), CliError> {
    require_case(cfg, Case::Field)?;
    cfg.validate()?;
    let section = cfg.field()?;
    let dir = cfg
        .paths
        .snapshots
        .as_ref()
        .ok_or_else(|| CliError::config("no snapshot directory (--snapshots or paths.snapshots)"))?;
    let out = cfg.paths.output.clone().unwrap_or_else(|| PathBuf::from("field_out"));
    std::fs::create_dir_all(&out).map_err(|e| CliError::from(e).in_file(&out))?;
    let components: Vec<Component> = section
        .export_components
        .iter()
        .map(|n| n.parse())
        .collect::<Result<_, _>>()?;
    let policy = cfg.policy()?;
    let field_cfg = cfg.field_config()?;
    let engine = Engine::new(cfg.workers())?;
    let files = snapshot_files(dir)?;

    let t0 = Instant::now();
    let first = load_snapshot(&files[0]).map_err(|e| CliError::from(e).in_file(&files[0]))?;
    let mut field = init_field(&first, &field_cfg, &cfg.initial_state()?)
        .map_err(|e| CliError::from(e).in_file(&files[0]))?;
    drop(first);
    export_all(&field, &components, &out, 0, section.export_format)?;
    let mut exports = 1;
    for (k, path) in files.iter().enumerate().skip(1) {
        let snap = load_snapshot(path).map_err(|e| CliError::from(e).in_file(path))?;
        field
            .advance(&snap, &policy, &engine)
            .map_err(|e| CliError::from(e).in_file(path))?;
        let last = k + 1 == files.len();
        if last || (section.export_every > 0 && k % section.export_every == 0) {
            export_all(&field, &components, &out, k, section.export_format)?;
            exports += 1;
        }
    }
    let wall = t0.elapsed().as_secs_f64();
    println!(
        "run-field: {} particles, {} snapshots, t = {} s, {} workers, {wall:.2} s",
        field.len(),
        files.len(),
        field.time,
        engine.workers()
    );
    println!(
        "particle volume V_tank / N = {:.6e} m3 (tabulated {:.6e} m3)",
        field.particle_volume, section.particle_volume
    );
    println!(
        "max pairwise state difference {:.3e}; {} kinetic steps, max |E(S_H)| {:.2e}",
        field.max_pairwise_difference(),
        field.stats.steps,
        field.stats.max_proton_residual
    );
    for c in &components {
        println!("total {} = {:.9e} (per m3 tank {:.9e})", c.name(), field.total_mass(*c), field.total_mass(*c) / section.v_tank);
    }
    println!("{exports} export sets written to {}", out.display());
    Ok(())
}

fn read_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    let f = File::open(path).map_err(|e| CliError::from(e).in_file(path))?;
    Trajectory::read_csv(BufReader::new(f)).map_err(|e| CliError::from(e).in_file(path))
}

pub fn compare(
    candidate: &Path,
    reference: &Path,
    components: &[String],
    output: Option<&Path>,
) -> Result<(), CliError> {
    let series: Vec<Series> = components
        .iter()
        .map(|n| n.parse().map_err(|_| CliError::config(format!("unknown component `{n}`"))))
        .collect::<Result<_, _>>()?;
    let cand = read_trajectory(candidate)?;
    let refr = read_trajectory(reference)?;
    let mut rows = Vec::with_capacity(series.len());
    for (name, s) in components.iter().zip(&series) {
        rows.push((name.as_str(), relative_rmse(&cand, &refr, *s)?));
    }
    let mut out = String::from("component,relative_rmse_percent\n");
    for (name, e) in &rows {
        out.push_str(&format!("{name},{e:.16e}\n"));
    }
    println!("{:<12} {:>14}", "component", "rel. RMSE %");
    for (name, e) in &rows {
        println!("{name:<12} {e:>14.6e}");
    }
    if let Some(path) = output {
        let mut w = create(path)?;
        w.write_all(out.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::from(e).in_file(path))?;
    }
    Ok(())
}

pub fn bench(
    cfg: &RunConfig,
    sizes: &[usize],
    workers: &[usize],
    repetitions: usize,
    output: Option<&Path>,
) -> Result<(), CliError> {
    cfg.validate()?;
    let workload = BenchWorkload {
        field: cfg.field_config()?,
        policy: cfg.policy()?,
        initial: cfg.initial_state()?,
    };
    let report = bench_scaling(sizes, workers, repetitions, &workload)?;
    println!("{:>10} {:>8} {:>12} {:>12} {:>8}", "particles", "workers", "mean s", "stddev s", "speedup");
    for c in &report.cells {
        println!(
            "{:>10} {:>8} {:>12.6} {:>12.6} {:>8.3}",
            c.n_particles, c.workers, c.mean_runtime, c.stddev, c.speedup
        );
    }
    let mut ws: Vec<usize> = report.cells.iter().map(|c| c.workers).collect();
    ws.sort_unstable();
    ws.dedup();
    for w in ws {
        if let Some(f) = report.fit(w) {
            println!(
                "W = {w}: runtime = {:.4e} s/particle * N + {:.4e} s, R^2 = {:.5}",
                f.slope, f.intercept, f.r_squared
            );
        }
    }
    if let Some(path) = output {
        let mut w = create(path)?;
        report.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::from(e).in_file(path))?;
    }
    Ok(())
}

pub struct ConvertOptions {
    pub to: SnapshotFormat,
    pub external: bool,
    pub time: f64,
    pub dt: f64,
    pub verify: bool,
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            files.extend(snapshot_files(p)?);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn bits(s: &ParticleSnapshot) -> Vec<u64> {
    let mut b = vec![s.time.to_bits()];
    for p in &s.particles {
        b.push(p.id);
        b.extend(p.position.iter().chain(&p.velocity).chain([&p.density]).map(|v| v.to_bits()));
    }
    b
}

pub fn convert(inputs: &[PathBuf], output: &Path, opt: &ConvertOptions) -> Result<(), CliError> {
    let files = expand_inputs(inputs)?;
    let single_file = files.len() == 1 && !output.is_dir() && output.extension().is_some();
    if !single_file {
        std::fs::create_dir_all(output).map_err(|e| CliError::from(e).in_file(output))?;
    }
    println!("{:<40} {:>10} {:>10} {:>10}", "file", "particles", "read ms", "write ms");
    for (k, input) in files.iter().enumerate() {
        let t0 = Instant::now();
        let snap = if opt.external {
            read_external(input, opt.time + k as f64 * opt.dt)
        } else {
            load_snapshot(input)
        }
        .map_err(|e| CliError::from(e).in_file(input))?;
        let read = t0.elapsed().as_secs_f64() * 1e3;
        let target = if single_file {
            output.to_path_buf()
        } else {
            let stem = input.file_stem().unwrap_or_default().to_string_lossy();
            output.join(format!("{stem}.{}", opt.to.extension()))
        };
        let t1 = Instant::now();
        match opt.to {
            SnapshotFormat::Binary => chad_field::snapshot::save_snapshot_binary(&snap, &target),
            SnapshotFormat::Ascii => chad_field::snapshot::save_snapshot_ascii(&snap, &target),
        }
        .map_err(|e| CliError::from(e).in_file(&target))?;
        let write = t1.elapsed().as_secs_f64() * 1e3;
        if opt.verify {
            let back = match opt.to {
                SnapshotFormat::Binary => chad_field::snapshot::load_snapshot_binary(&target),
                SnapshotFormat::Ascii => chad_field::snapshot::load_snapshot_ascii(&target),
            }
            .map_err(|e| CliError::from(e).in_file(&target))?;
            if bits(&back) != bits(&snap) {
                return Err(CliError::new(ExitClass::Mismatch, "re-read differs from the input").in_file(&target));
            }
        }
        println!(
            "{:<40} {:>10} {:>10.2} {:>10.2}",
            input.display(),
            snap.particles.len(),
            read,
            write
        );
    }
    Ok(())
}

pub struct GenOptions {
    pub particles: usize,
    pub duration: f64,
    pub dt: f64,
    pub cylinder: CylinderSpec,
    pub seed: u64,
    pub format: SnapshotFormat,
}

pub fn gen_snapshots(output: &Path, opt: &GenOptions) -> Result<(), CliError> {
    if opt.particles == 0 {
        return Err(CliError::config("particle count must be >= 1"));
    }
    if !(opt.dt > 0.0 && opt.duration >= 0.0) {
        return Err(CliError::config(format!("duration {} s, dt {} s", opt.duration, opt.dt)));
    }
    let c = &opt.cylinder;
    if !(c.radius > 0.0 && c.height > 0.0 && c.rpm.is_finite()) {
        return Err(CliError::config(format!("cylinder {c:?}")));
    }
    std::fs::create_dir_all(output).map_err(|e| CliError::from(e).in_file(output))?;
    let cloud = RotatingCloud::new(opt.particles, *c, opt.seed);
    let times = snapshot_times(opt.duration, opt.dt);
    for (k, t) in times.iter().enumerate() {
        let path = output.join(format!("snap_{k:06}.{}", opt.format.extension()));
        save_snapshot(&cloud.snapshot_at(*t), &path).map_err(|e| CliError::from(e).in_file(&path))?;
    }
    println!(
        "gen-snapshots: {} files of {} particles, t = 0..{} s every {} s, in {}",
        times.len(),
        opt.particles,
        times.last().copied().unwrap_or(0.0),
        opt.dt,
        output.display()
    );
    Ok(())
}
