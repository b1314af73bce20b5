// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod external;

use std::path::PathBuf;

use chad_core::integrate::Scheme;
use chad_core::solver::InitialGuess;
use chad_core::AlgebraicMode;
use chad_field::snapshot::SnapshotFormat;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{FileFormat, Preset, RunConfig};
use error::{CliError, EXIT_CODE_HELP};

#[derive(Parser)]
#[command(name = "chad", version, about = "Anaerobic digestion kinetics for tanks and particle fields", after_help = EXIT_CODE_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a single stirred tank and write its trajectory CSV.
    RunCstr(RunCstrArgs),
    /// Advance a particle field through a directory of snapshots.
    RunField(RunFieldArgs),
    /// Relative RMSE (%) of a candidate trajectory against a reference.
    Compare(CompareArgs),
    /// Time one outer step over particle counts and worker counts.
    Bench(BenchArgs),
    /// Convert particle snapshots between ASCII and binary.
    Convert(ConvertArgs),
    /// Write synthetic snapshots of a rigidly rotating particle cloud.
    GenSnapshots(GenArgs),
    /// Print a preset configuration or one of the embedded data files.
    DumpConfig(DumpArgs),
}

/// Options shared by the run commands. Flags override the configuration.
#[derive(Args)]
struct Common {
    /// TOML run configuration; the preset is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset to start from when no configuration file is given.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dump_config: bool,
    /// Parameter file (key = value).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Initial state file (key = value).
    #[arg(long)]
    initial_state: Option<PathBuf>,
    /// Temperature, K.
    #[arg(long)]
    temperature: Option<f64>,
    /// Atmospheric pressure, bar.
    #[arg(long)]
    p_atm: Option<f64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Newton iteration cap.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Newton residual tolerance.
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Newton relative step tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long, value_enum)]
    initial_guess: Option<GuessArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    FixedEuler,
    FixedRk4Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum GuessArg {
    PreviousValue,
    NeutralPh,
    Midpoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Dae,
    Ode,
}

#[derive(Clone, Copy, ValueEnum)]
enum SnapFormatArg {
    Ascii,
    Binary,
}

impl From<SnapFormatArg> for SnapshotFormat {
    fn from(f: SnapFormatArg) -> Self {
        match f {
            SnapFormatArg::Ascii => SnapshotFormat::Ascii,
            SnapFormatArg::Binary => SnapshotFormat::Binary,
        }
    }
}

#[derive(Args)]
struct RunCstrArgs {
    #[command(flatten)]
    common: Common,
    /// Simulated time, d.
    #[arg(long)]
    duration: Option<f64>,
    /// Integrator step, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Trajectory sampling interval, d.
    #[arg(long)]
    record_interval: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Inflow composition file.
    #[arg(long)]
    inflow: Option<PathBuf>,
    /// Liquid volume, m³.
    #[arg(long)]
    v_liq: Option<f64>,
    /// Headspace volume, m³.
    #[arg(long)]
    v_gas: Option<f64>,
    /// Inflow and outflow rate, m³/d.
    #[arg(long)]
    flow: Option<f64>,
    /// Gas outlet conductance, m³ d⁻¹ bar⁻¹.
    #[arg(long)]
    k_p: Option<f64>,
    /// Trajectory CSV; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunFieldArgs {
    #[command(flatten)]
    common: Common,
    /// Directory of snapshots, taken in file-name order.
    #[arg(long)]
    snapshots: Option<PathBuf>,
    /// Export directory.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "CHAD_WORKERS")]
    workers: Option<usize>,
    /// Snapshot spacing, s.
    #[arg(long)]
    outer_dt: Option<f64>,
    /// Kinetic steps per snapshot interval.
    #[arg(long)]
    substeps: Option<u32>,
    /// Export every this many snapshots (0: first and last only).
    #[arg(long)]
    export_every: Option<usize>,
    /// Comma-separated component names to export.
    #[arg(long, value_delimiter = ',')]
    components: Option<Vec<String>>,
    #[arg(long, value_enum)]
    format: Option<FileFormat>,
}

#[derive(Args)]
struct CompareArgs {
    candidate: PathBuf,
    reference: PathBuf,
    /// Comma-separated series (state names, pH, G_ch4, q_gas).
    #[arg(long, value_delimiter = ',', default_values_t = commands::COMPARE_DEFAULT.map(String::from))]
    components: Vec<String>,
    /// Also write the table as CSV.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Run configuration with a [field] section; the lab preset when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "110929")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
    workers: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    /// Report CSV.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    /// Snapshot files or directories.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output file (single input with an extension) or directory.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "binary")]
    to: SnapFormatArg,
    /// Inputs are CSVs exported by an external SPH tool.
    #[arg(long)]
    external: bool,
    /// Time of the first external file, s.
    #[arg(long, default_value_t = 0.0)]
    time: f64,
    /// Time between consecutive external files, s.
    #[arg(long, default_value_t = chad_field::presets::CASE2_OUTER_DT)]
    dt: f64,
    /// Re-read every output and check it is bit-identical.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = chad_field::presets::CASE2_PARTICLES)]
    particles: usize,
    /// s.
    #[arg(long, default_value_t = chad_field::presets::CASE2_DURATION)]
    duration: f64,
    /// s.
    #[arg(long, default_value_t = chad_field::presets::CASE2_OUTER_DT)]
    dt: f64,
    /// Cylinder radius, m.
    #[arg(long)]
    radius: Option<f64>,
    /// Cylinder height, m.
    #[arg(long)]
    height: Option<f64>,
    #[arg(long, default_value_t = chad_field::presets::CASE2_MIXER_RPM)]
    rpm: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "binary")]
    format: SnapFormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpWhat {
    Case1,
    Case2,
    Params,
    InitialState,
    Inflow,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(value_enum)]
    what: DumpWhat,
    /// Write to a file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn base_config(common: &Common, default: Preset) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::preset(common.preset.unwrap_or(default)),
    };
    let p = &mut cfg.paths;
    if common.params.is_some() {
        p.params = common.params.clone();
    }
    if common.initial_state.is_some() {
        p.initial_state = common.initial_state.clone();
    }
    if let Some(t) = common.temperature {
        cfg.conditions.temperature = t;
    }
    if let Some(v) = common.p_atm {
        cfg.conditions.p_atm = v;
    }
    if let Some(s) = common.scheme {
        cfg.integrator.scheme = match s {
            SchemeArg::FixedEuler => Scheme::FixedEuler,
            SchemeArg::FixedRk4Oracle => Scheme::FixedRk4Oracle,
        };
    }
    let n = &mut cfg.solver;
    if let Some(v) = common.max_iterations {
        n.max_iterations = v;
    }
    if let Some(v) = common.abs_tol {
        n.absolute_tolerance = v;
    }
    if let Some(v) = common.rel_tol {
        n.relative_tolerance = v;
    }
    if let Some(g) = common.initial_guess {
        n.initial_guess = match g {
            GuessArg::PreviousValue => InitialGuess::PreviousValue,
            GuessArg::NeutralPh => InitialGuess::NeutralPh,
            GuessArg::Midpoint => InitialGuess::Midpoint,
        };
    }
    Ok(cfg)
}

fn cstr_config(a: &RunCstrArgs) -> Result<RunConfig, CliError> {
    let mut cfg = base_config(&a.common, Preset::Case1)?;
    if let Some(dt) = a.dt {
        cfg.integrator.dt = dt;
    }
    if a.inflow.is_some() {
        cfg.paths.inflow = a.inflow.clone();
    }
    if a.output.is_some() {
        cfg.paths.output = a.output.clone();
    }
    let Some(s) = cfg.cstr.as_mut() else {
        return Ok(cfg);
    };
    if let Some(v) = a.duration {
        s.duration_days = v;
    }
    if let Some(v) = a.record_interval {
        s.record_interval_days = v;
    }
    if let Some(m) = a.mode {
        s.mode = match m {
            ModeArg::Dae => AlgebraicMode::Dae,
            ModeArg::Ode => AlgebraicMode::Ode,
        };
    }
    if let Some(v) = a.v_liq {
        s.v_liq = v;
    }
    if let Some(v) = a.v_gas {
        s.v_gas = v;
    }
    if let Some(v) = a.flow {
        s.q_in = v;
        s.q_out = v;
    }
    if let Some(v) = a.k_p {
        s.k_p = v;
    }
    Ok(cfg)
}

fn field_config(a: &RunFieldArgs) -> Result<RunConfig, CliError> {
    let mut cfg = base_config(&a.common, Preset::Case2)?;
    if a.snapshots.is_some() {
        cfg.paths.snapshots = a.snapshots.clone();
    }
    if a.output.is_some() {
        cfg.paths.output = a.output.clone();
    }
    if a.workers.is_some() {
        cfg.workers = a.workers;
    }
    let Some(f) = cfg.field.as_mut() else {
        return Ok(cfg);
    };
    if let Some(v) = a.outer_dt {
        f.outer_dt = v;
    }
    if let Some(v) = a.substeps {
        f.inner_substeps = v;
    }
    if let Some(v) = a.export_every {
        f.export_every = v;
    }
    if let Some(v) = &a.components {
        f.export_components = v.clone();
    }
    if let Some(v) = a.format {
        f.export_format = v;
    }
    Ok(cfg)
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::from(e).in_file(p)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RunCstr(a) => {
            let cfg = cstr_config(&a)?;
            if a.common.dump_config {
                return emit(&cfg.to_toml(), None);
            }
            commands::run_cstr(&cfg)
        }
        Command::RunField(a) => {
            let cfg = field_config(&a)?;
            if a.common.dump_config {
                return emit(&cfg.to_toml(), None);
            }
            commands::run_field(&cfg)
        }
        Command::Compare(a) => commands::compare(&a.candidate, &a.reference, &a.components, a.output.as_deref()),
        Command::Bench(a) => {
            let cfg = match &a.config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::preset(Preset::Case2),
            };
            commands::bench(&cfg, &a.sizes, &a.workers, a.repetitions, a.output.as_deref())
        }
        Command::Convert(a) => commands::convert(
            &a.inputs,
            &a.output,
            &commands::ConvertOptions {
                to: a.to.into(),
                external: a.external,
                time: a.time,
                dt: a.dt,
                verify: a.verify,
            },
        ),
        Command::GenSnapshots(a) => {
            let mut cylinder = chad_field::presets::case2_cylinder();
            cylinder.rpm = a.rpm;
            if let Some(r) = a.radius {
                cylinder.radius = r;
            }
            if let Some(h) = a.height {
                cylinder.height = h;
            }
            commands::gen_snapshots(
                &a.output,
                &commands::GenOptions {
                    particles: a.particles,
                    duration: a.duration,
                    dt: a.dt,
                    cylinder,
                    seed: a.seed,
                    format: a.format.into(),
                },
            )
        }
        Command::DumpConfig(a) => {
            let text = match a.what {
                DumpWhat::Case1 => RunConfig::preset(Preset::Case1).to_toml(),
                DumpWhat::Case2 => RunConfig::preset(Preset::Case2).to_toml(),
                DumpWhat::Params => chad_core::params::DEFAULT_PARAMS.to_string(),
                DumpWhat::InitialState => chad_core::presets::BSM2_INITIAL.to_string(),
                DumpWhat::Inflow => chad_core::presets::BSM2_INFLOW.to_string(),
            };
            emit(&text, a.output.as_ref())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| run(cli)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .map(String::as_str)
            .or_else(|| p.downcast_ref::<&str>().copied())
            .unwrap_or("unknown panic");
        Err(CliError::new(error::ExitClass::Other, format!("internal error: {msg}")))
    });
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
