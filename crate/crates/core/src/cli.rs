//! Command-line front end: `run`, `verify`, `emission` and `parse`.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error (bad schedule,
//! blockade violation, failed verification).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dsl;
use crate::emission::{self, Geometry};
use crate::protocols::{run_schedule, Protocol, RunMode, Schedule, SimResult};
use crate::state::StateDump;
use crate::verify::{verify_result, Tolerances};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "rydberg-source", version, about = "Rydberg-ensemble photonic state source simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a schedule and write the run record.
    Run(RunArgs),
    /// Execute a schedule and check it against a target state.
    Verify(VerifyArgs),
    /// Sample an atom cloud and scan its cooperative emission pattern.
    Emission(EmissionArgs),
    /// Check a `.pulse` file and report diagnostics.
    Parse(ParseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolName {
    Bell,
    Ghz,
    Trine,
    Cluster1d,
    Cluster2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Trajectory,
    Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryName {
    Ball,
    Gaussian,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Builtin protocol.
    #[arg(long, value_enum, conflicts_with = "schedule")]
    pub protocol: Option<ProtocolName>,
    /// GHZ mode count.
    #[arg(long, default_value_t = 3)]
    pub modes: usize,
    /// Slot of the mixed photon in the trine protocol.
    #[arg(long, default_value_t = 1)]
    pub slot: usize,
    /// Photons emitted by the 1D cluster protocol.
    #[arg(long, default_value_t = 4)]
    pub photons: usize,
    /// Columns of the 2D cluster protocol.
    #[arg(long, default_value_t = 2)]
    pub columns: usize,
    /// Schedule file in the `.pulse` format.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// How classical randomness is handled.
    #[arg(long, value_enum, default_value_t = ModeName::Branch)]
    pub mode: ModeName,
    /// Seed for trajectory mode.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the schedule in canonical `.pulse` form to this path (`-` for stdout).
    #[arg(long)]
    pub emit_dsl: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Primary output path (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also write the final amplitudes as JSON.
    #[arg(long)]
    pub dump_state: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Reference state for a schedule file (defaults to the builtin protocol's own target).
    #[arg(long, value_enum)]
    pub target: Option<ProtocolName>,
    /// Report path (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest fidelity deficit tolerated (pass needs fidelity >= 1 - tol).
    #[arg(long, default_value_t = 1e-12)]
    pub fidelity_tol: f64,
    /// Largest deviation of a stabilizer expectation from 1.
    #[arg(long, default_value_t = 1e-10)]
    pub stabilizer_tol: f64,
    /// Maximum trace distance between branch-conditioned pair states.
    #[arg(long, default_value_t = 1e-12)]
    pub trace_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EmissionArgs {
    /// Atom count K.
    #[arg(long, default_value_t = 1000)]
    pub atoms: usize,
    /// Cloud diameter in μm (at most 10).
    #[arg(long, default_value_t = 10.0)]
    pub diameter: f64,
    /// Ball of uniform density, or a Gaussian truncated at the diameter.
    #[arg(long, value_enum, default_value_t = GeometryName::Ball)]
    pub geometry: GeometryName,
    /// Transition wavelength in μm.
    #[arg(long, default_value_t = emission::DEFAULT_WAVELENGTH_UM)]
    pub wavelength: f64,
    /// Scan points per great circle (even, at least 8).
    #[arg(long, default_value_t = 72)]
    pub grid: usize,
    /// Random directions for the background estimate.
    #[arg(long, default_value_t = 2000)]
    pub background_samples: usize,
    /// Cone half-angle (rad) around the peak excluded from the background.
    #[arg(long, default_value_t = 0.5)]
    pub exclusion: f64,
    /// Seed for position sampling; the background directions use seed + 1.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `json` writes the summary, `csv` the scanned pattern.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output path (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the scanned pattern as CSV.
    #[arg(long)]
    pub pattern_out: Option<PathBuf>,
    /// Also write the sampled positions as CSV.
    #[arg(long)]
    pub cloud_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ParseArgs {
    /// `.pulse` file to check.
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the canonical form to this path (`-` for stdout).
    #[arg(long)]
    pub emit_dsl: Option<PathBuf>,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain(_) => 2,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        // the library messages already embed their sources
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Domain(format!("{}: {e}", path.display()))
}

fn write_to(path: Option<&Path>, content: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) if p != Path::new("-") => fs::write(p, content).map_err(|e| io_error(p, e)),
        _ => stdout
            .write_all(content.as_bytes())
            .map_err(|e| CliError::Domain(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn builtin(name: ProtocolName, a: &SourceArgs) -> Protocol {
    match name {
        ProtocolName::Bell => Protocol::Bell,
        ProtocolName::Ghz => Protocol::Ghz { modes: a.modes },
        ProtocolName::Trine => Protocol::Trine { slot: a.slot },
        ProtocolName::Cluster1d => Protocol::Cluster1d { photons: a.photons },
        ProtocolName::Cluster2d => Protocol::Cluster2d { columns: a.columns },
    }
}

struct Loaded {
    schedule: Schedule,
    protocol: Option<Protocol>,
    label: String,
}

fn load_source(a: &SourceArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<Loaded> {
    let loaded = match (&a.protocol, &a.schedule) {
        (Some(name), None) => {
            let protocol = builtin(*name, a);
            let schedule = protocol.schedule()?;
            Loaded {
                label: schedule.name().unwrap_or(protocol.name()).to_string(),
                schedule,
                protocol: Some(protocol),
            }
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let schedule = dsl::parse(&text).map_err(|errs| {
                let _ = stderr.write_all(dsl::render_diagnostics(&text, &errs).as_bytes());
                CliError::Domain(format!("{}: {} parse error(s)", path.display(), errs.len()))
            })?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "schedule".into());
            Loaded {
                schedule: schedule.named(label.clone()),
                protocol: None,
                label,
            }
        }
        _ => return Err(CliError::Usage("exactly one of --protocol or --schedule is required".into())),
    };
    if let Some(p) = &a.emit_dsl {
        write_to(Some(p), &dsl::serialize(&loaded.schedule), stdout)?;
    }
    Ok(loaded)
}

fn run_mode(a: &SourceArgs) -> CliResult<RunMode> {
    match (a.mode, a.seed) {
        (ModeName::Branch, _) => Ok(RunMode::Branch),
        (ModeName::Trajectory, Some(seed)) => Ok(RunMode::Trajectory { seed }),
        (ModeName::Trajectory, None) => Err(CliError::Usage("--mode trajectory requires --seed".into())),
    }
}

#[derive(Serialize)]
struct RecordOut {
    mode: usize,
    outcome: char,
    probability: f64,
}

#[derive(Serialize)]
struct BranchOut {
    weight: f64,
    records: Vec<RecordOut>,
    configurations: usize,
}

#[derive(Serialize)]
struct RunOut {
    schema_version: u32,
    schedule: String,
    mode: &'static str,
    seed: Option<u64>,
    levels: usize,
    modes: usize,
    instructions: usize,
    duration_s: f64,
    fidelity: Option<f64>,
    branches: Vec<BranchOut>,
}

#[derive(Serialize)]
struct DumpBranch {
    weight: f64,
    #[serde(flatten)]
    state: StateDump,
}

#[derive(Serialize)]
struct DumpOut {
    schema_version: u32,
    branches: Vec<DumpBranch>,
}

fn state_csv(result: &SimResult<f64>) -> String {
    let mut out = String::from("branch,weight,configuration,re,im\n");
    for (i, b) in result.branches.iter().enumerate() {
        for (c, a) in b.state.iter() {
            out.push_str(&format!("{i},{},{c},{},{}\n", b.weight, a.re, a.im));
        }
    }
    out
}

fn cmd_run(a: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let mode = run_mode(&a.source)?;
    let loaded = load_source(&a.source, stdout, stderr)?;
    let result = run_schedule::<f64>(&loaded.schedule, mode)?;
    let fidelity = match &loaded.protocol {
        Some(p) => Some(verify_result(p, &result, &Tolerances::default())?.fidelity),
        None => None,
    };
    if let Some(path) = &a.dump_state {
        let dump = DumpOut {
            schema_version: SCHEMA_VERSION,
            branches: result
                .branches
                .iter()
                .map(|b| DumpBranch {
                    weight: b.weight,
                    state: b.state.dump(),
                })
                .collect(),
        };
        write_to(Some(path), &to_json(&dump), stdout)?;
    }
    let content = match a.format {
        Format::Csv => state_csv(&result),
        Format::Json => to_json(&RunOut {
            schema_version: SCHEMA_VERSION,
            schedule: loaded.label,
            mode: match mode {
                RunMode::Branch => "branch",
                RunMode::Trajectory { .. } => "trajectory",
            },
            seed: match mode {
                RunMode::Trajectory { seed } => Some(seed),
                RunMode::Branch => None,
            },
            levels: loaded.schedule.level_count(),
            modes: result.mode_count(),
            instructions: loaded.schedule.instructions().len(),
            duration_s: result.duration_s,
            fidelity,
            branches: result
                .branches
                .iter()
                .map(|b| BranchOut {
                    weight: b.weight,
                    records: b
                        .records
                        .iter()
                        .map(|r| RecordOut {
                            mode: r.mode,
                            outcome: r.outcome.symbol(),
                            probability: r.probability,
                        })
                        .collect(),
                    configurations: b.state.len(),
                })
                .collect(),
        }),
    };
    write_to(a.out.as_deref(), &content, stdout)
}

/// Protocol parameters matching a run of `modes` photons.
fn target_protocol(name: ProtocolName, a: &SourceArgs, modes: usize) -> Protocol {
    match name {
        ProtocolName::Ghz => Protocol::Ghz { modes },
        ProtocolName::Cluster1d => Protocol::Cluster1d { photons: modes },
        ProtocolName::Cluster2d => Protocol::Cluster2d { columns: modes / 2 },
        other => builtin(other, a),
    }
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<bool> {
    let mode = run_mode(&a.source)?;
    let loaded = load_source(&a.source, stdout, stderr)?;
    let result = run_schedule::<f64>(&loaded.schedule, mode)?;
    let modes = result.mode_count();
    let protocol = match (a.target, loaded.protocol) {
        (Some(t), _) => target_protocol(t, &a.source, modes),
        (None, Some(p)) => p,
        (None, None) => return Err(CliError::Usage("--target is required with --schedule".into())),
    };
    let expected = protocol.schedule()?.expected_modes();
    if expected != modes {
        return Err(CliError::Domain(format!(
            "target {} expects {expected} modes, the schedule emits {modes}",
            protocol.name()
        )));
    }
    let tol = Tolerances {
        fidelity: a.fidelity_tol,
        stabilizer: a.stabilizer_tol,
        trace_distance: a.trace_tol,
    };
    let report = verify_result(&protocol, &result, &tol)?;
    write_to(a.out.as_deref(), &to_json(&report), stdout)?;
    Ok(report.pass)
}

#[derive(Serialize)]
struct EmissionOut {
    schema_version: u32,
    seed: u64,
    geometry: &'static str,
    diameter_um: f64,
    wavelength_um: f64,
    grid: usize,
    background_samples: usize,
    exclusion_rad: f64,
    #[serde(flatten)]
    summary: emission::EmissionSummary,
}

fn cmd_emission(a: &EmissionArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if !(a.wavelength.is_finite() && a.wavelength > 0.0) {
        return Err(CliError::Usage(format!("wavelength must be positive, got {}", a.wavelength)));
    }
    let geometry = match a.geometry {
        GeometryName::Ball => Geometry::UniformBall,
        GeometryName::Gaussian => Geometry::Gaussian,
    };
    let cloud = emission::sample_cloud::<f64>(a.atoms, geometry, a.diameter, a.seed)?;
    let k = emission::wavenumber(a.wavelength);
    let k_match = [0.0, 0.0, k];
    let pattern = emission::pattern_scan(&cloud, &k_match, k, a.grid)?;
    let background = emission::background_mean(
        &cloud,
        &k_match,
        k,
        a.background_samples,
        a.exclusion,
        a.seed.wrapping_add(1),
    )?;
    if let Some(p) = &a.pattern_out {
        write_to(Some(p), &pattern.to_csv(), stdout)?;
    }
    if let Some(p) = &a.cloud_out {
        write_to(Some(p), &cloud.to_csv(), stdout)?;
    }
    let content = match a.format {
        Format::Csv => pattern.to_csv(),
        Format::Json => to_json(&EmissionOut {
            schema_version: SCHEMA_VERSION,
            seed: a.seed,
            geometry: match a.geometry {
                GeometryName::Ball => "ball",
                GeometryName::Gaussian => "gaussian",
            },
            diameter_um: a.diameter,
            wavelength_um: a.wavelength,
            grid: a.grid,
            background_samples: a.background_samples,
            exclusion_rad: a.exclusion,
            summary: emission::summarize(&cloud, &pattern, background),
        }),
    };
    write_to(a.out.as_deref(), &content, stdout)
}

#[derive(Serialize)]
struct DiagnosticOut {
    line: usize,
    column: usize,
    length: usize,
    message: String,
    expected: Option<String>,
}

#[derive(Serialize)]
struct ParseOut {
    schema_version: u32,
    valid: bool,
    levels: Option<usize>,
    instructions: Option<usize>,
    modes: Option<usize>,
    errors: Vec<DiagnosticOut>,
}

fn cmd_parse(a: &ParseArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<bool> {
    let text = fs::read_to_string(&a.file).map_err(|e| io_error(&a.file, e))?;
    let parsed = dsl::parse(&text);
    if let (Ok(s), Some(p)) = (&parsed, &a.emit_dsl) {
        write_to(Some(p), &dsl::serialize(s), stdout)?;
    }
    let out = match &parsed {
        Ok(s) => ParseOut {
            schema_version: SCHEMA_VERSION,
            valid: true,
            levels: Some(s.level_count()),
            instructions: Some(s.instructions().len()),
            modes: Some(s.expected_modes()),
            errors: Vec::new(),
        },
        Err(errs) => {
            let _ = stderr.write_all(dsl::render_diagnostics(&text, errs).as_bytes());
            ParseOut {
                schema_version: SCHEMA_VERSION,
                valid: false,
                levels: None,
                instructions: None,
                modes: None,
                errors: errs
                    .iter()
                    .map(|e| DiagnosticOut {
                        line: e.span.line,
                        column: e.span.column,
                        length: e.span.length,
                        message: e.message.clone(),
                        expected: e.expected.clone(),
                    })
                    .collect(),
            }
        }
    };
    let content = match a.format {
        Format::Json => to_json(&out),
        Format::Csv => {
            let mut s = String::from("line,column,length,message\n");
            for e in &out.errors {
                s.push_str(&format!("{},{},{},\"{}\"\n", e.line, e.column, e.length, e.message.replace('"', "\"\"")));
            }
            s
        }
    };
    stdout
        .write_all(content.as_bytes())
        .map_err(|e| CliError::Domain(format!("stdout: {e}")))?;
    Ok(out.valid)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with_io<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a, stdout, stderr).map(|_| true),
        Command::Verify(a) => cmd_verify(a, stdout, stderr),
        Command::Emission(a) => cmd_emission(a, stdout).map(|_| true),
        Command::Parse(a) => cmd_parse(a, stdout, stderr),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) | CliError::Domain(m) => m,
            };
            let _ = writeln!(stderr, "error: {msg}");
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdout.lock(), &mut stderr.lock())
}
