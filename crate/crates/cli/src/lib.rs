//! Command-line front end: argument parsing, config files, run manifests
//! and replay.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

pub mod commands;
pub mod error;
pub mod manifest;

pub use error::CliError;
use manifest::{absolute, csv_within_tolerance, sha256_hex, OutputKind, RunManifest, Session, STDOUT};

#[derive(Debug, Parser, Serialize)]
#[command(name = "flatlab", version, about = "Exact experiments on genus-two translation surfaces")]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized drivers.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// TOML file with defaults; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Where to write the run manifest (default: `<out>.manifest.json`).
    #[arg(long, global = true)]
    pub record: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Write a named example surface as JSON.
    #[command(args_override_self = true)]
    Build(BuildArgs),
    /// Cylinder decomposition in one direction, or a periodicity probe.
    #[command(args_override_self = true)]
    Cylinders(CylindersArgs),
    /// Exact eigenform-locus membership test of a three-cylinder direction.
    #[command(args_override_self = true)]
    CheckLm(CheckLmArgs),
    /// Saddle connections up to a length bound.
    #[command(args_override_self = true)]
    Saddles(SaddlesArgs),
    /// Apply a unimodular matrix.
    #[command(args_override_self = true)]
    Act(ActArgs),
    /// Rel deformation, horizontal rel interval and degenerations.
    #[command(args_override_self = true)]
    Rel(RelArgs),
    /// Horocycle (and horocycle-rel) orbit averages.
    #[command(args_override_self = true)]
    Average(AverageArgs),
    /// Compare averages of several surfaces over a schedule of times.
    #[command(args_override_self = true)]
    Equidist(EquidistArgs),
    /// Limits of transverse-divergence sequences.
    #[command(args_override_self = true)]
    DivergenceVerify(DivergenceArgs),
    /// Validate a surface file and print its cone report.
    #[command(args_override_self = true)]
    Validate(ValidateArgs),
    /// Re-run a recorded manifest and compare outputs.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Build(_) => "build",
            Command::Cylinders(_) => "cylinders",
            Command::CheckLm(_) => "check-lm",
            Command::Saddles(_) => "saddles",
            Command::Act(_) => "act",
            Command::Rel(_) => "rel",
            Command::Average(_) => "average",
            Command::Equidist(_) => "equidist",
            Command::DivergenceVerify(_) => "divergence-verify",
            Command::Validate(_) => "validate",
            Command::Replay(_) => "replay",
        }
    }
}

const SUBCOMMANDS: [&str; 11] = [
    "build",
    "cylinders",
    "check-lm",
    "saddles",
    "act",
    "rel",
    "average",
    "equidist",
    "divergence-verify",
    "validate",
    "replay",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    Octagon,
    Decagon,
    DecagonQ5,
    Ltable,
    Ztable,
    DecagonEigenform,
    SlitTori,
    SplitLtable,
    Torus,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildArgs {
    #[arg(value_enum)]
    pub kind: Example,
    /// JSON object of parameters; numbers may be written `a+bs` with `s = sqrt d`.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SurfaceIn {
    #[arg(long)]
    pub surface: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CylindersArgs {
    #[command(flatten)]
    pub input: SurfaceIn,
    /// Direction `a,b`.
    #[arg(long, default_value = "1,0")]
    pub dir: String,
    /// Probe every saddle-connection direction up to this length instead.
    #[arg(long)]
    pub probe: Option<String>,
    /// Maximum triangle crossings per traced leaf.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckLmArgs {
    #[command(flatten)]
    pub input: SurfaceIn,
    #[arg(long, default_value = "1,0")]
    pub dir: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SaddlesArgs {
    #[command(flatten)]
    pub input: SurfaceIn,
    #[arg(long)]
    pub bound: String,
    #[arg(long)]
    pub horizontal_only: bool,
    #[arg(long, default_value_t = flatlab::saddles::DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ActArgs {
    #[command(flatten)]
    pub input: SurfaceIn,
    /// Row-major entries `a,b,c,d` of a determinant-one matrix.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: String,
    /// Also bring the result to canonical Delaunay form.
    #[arg(long)]
    pub canonical: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RelArgs {
    #[command(flatten)]
    pub input: SurfaceIn,
    /// Move the zero `--cone` by the vector `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub vec: Option<String>,
    /// Cone id to move (default: the lower-numbered zero).
    #[arg(long)]
    pub cone: Option<usize>,
    /// Report the horizontal rel interval, searching up to `--bound`.
    #[arg(long)]
    pub interval: bool,
    /// Classify the degeneration at this endpoint of the interval.
    #[arg(long, allow_hyphen_values = true)]
    pub classify: Option<String>,
    #[arg(long, default_value = "10")]
    pub bound: String,
    #[arg(long)]
    pub canonical: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AverageArgs {
    #[command(flatten)]
    pub input: SurfaceIn,
    /// `systole[:cap]`, `constant:c`, `saddle-count[:L]`, `interval-width[:cap]`.
    #[arg(long, default_value = "systole")]
    pub obs: String,
    #[arg(long = "T")]
    pub t: String,
    #[arg(long)]
    pub dt: String,
    /// Rel step; when given the horocycle-rel average is computed.
    #[arg(long)]
    pub ds: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EquidistArgs {
    /// Experiment description (JSON): surfaces, observable, T schedule, steps.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full result table as JSON.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Family {
    #[value(name = "caseA")]
    #[serde(rename = "caseA")]
    CaseA,
    #[value(name = "caseB")]
    #[serde(rename = "caseB")]
    CaseB,
    #[value(name = "custom")]
    #[serde(rename = "custom")]
    Custom,
}

#[derive(Debug, Args, Serialize)]
pub struct DivergenceArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value = "1e6")]
    pub kmax: String,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full limit report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: SurfaceIn,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => return report(e),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let effective: Vec<String> = argv[1..].iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run_parsed(&cli, &effective) {
        Ok(()) => 0,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> i32 {
    eprintln!("{}", e.to_json());
    2
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::new("InvalidParameter", "cli", "--threads must be positive")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::new("ThreadPool", "cli", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn run_parsed(cli: &Cli, effective: &[String]) -> Result<(), CliError> {
    if let Command::Replay(r) = &cli.command {
        println!("{}", replay(&r.manifest, cli.threads)?);
        return Ok(());
    }
    let start = Instant::now();
    let mut sess = Session::default();
    with_threads(cli.threads, || commands::execute(cli, &mut sess))??;
    let manifest = RunManifest {
        tool: manifest::TOOL.into(),
        version: manifest::VERSION.into(),
        command: cli.command.name().into(),
        argv: effective.to_vec(),
        cwd: absolute_display(Path::new(".")),
        params: serde_json::to_value(&cli.command).expect("arguments serialize"),
        seed: cli.seed,
        threads: cli.threads,
        inputs: sess.inputs.clone(),
        outputs: sess.outputs.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        notes: sess.notes.clone(),
    };
    let target = cli.record.clone().or_else(|| {
        sess.outputs
            .iter()
            .find(|o| o.path != STDOUT)
            .map(|o| PathBuf::from(format!("{}.manifest.json", o.path)))
    });
    if let Some(path) = target {
        manifest::write_atomic(&path, manifest.to_json().as_bytes())?;
    }
    Ok(())
}

/// Inserts `--key value` pairs from the `--config` TOML file right after the
/// subcommand name, ahead of the user's own flags so that those win.
/// Top-level keys are global flags; a table named after the subcommand
/// holds its flags.
fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut config = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            config = strs.get(i + 1).cloned();
        } else if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        }
    }
    let Some(config) = config else { return Ok(argv) };
    let Some(pos) = strs.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let path = Path::new(&config);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let extra = config_flags(&text, &strs[pos])?;
    let mut out = argv[..=pos].to_vec();
    out.extend(extra.into_iter().map(OsString::from));
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

/// Flags contributed by a TOML config file to subcommand `sub`.
pub fn config_flags(text: &str, sub: &str) -> Result<Vec<String>, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::new("BadConfig", "cli", e.to_string()))?;
    let mut extra = Vec::new();
    let mut push = |key: &str, v: &toml::Value| -> Result<(), CliError> {
        let flag = format!("--{key}");
        match v {
            toml::Value::Boolean(true) => extra.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::String(s) => extra.extend([flag, s.clone()]),
            toml::Value::Integer(n) => extra.extend([flag, n.to_string()]),
            toml::Value::Float(x) => extra.extend([flag, x.to_string()]),
            other => {
                return Err(CliError::new("BadConfig", "cli", format!("unsupported value for {key}: {other}")));
            }
        }
        Ok(())
    };
    for (k, v) in &table {
        match v {
            toml::Value::Table(t) if k == sub => {
                for (k2, v2) in t {
                    push(k2, v2)?;
                }
            }
            toml::Value::Table(_) => {}
            _ if k == "config" => {}
            _ => push(k, v)?,
        }
    }
    Ok(extra)
}

fn json_close(a: &serde_json::Value, b: &serde_json::Value, rel: f64) -> bool {
    use serde_json::Value::*;
    match (a, b) {
        (Number(x), Number(y)) => match (x.as_f64(), y.as_f64()) {
            (Some(x), Some(y)) => (x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0),
            _ => x == y,
        },
        (Array(x), Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| json_close(p, q, rel)),
        (Object(x), Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| json_close(v, w, rel)))
        }
        _ => a == b,
    }
}

/// Re-runs a manifest. Inputs must still hash to the recorded values;
/// exact outputs must be byte-identical and floating ones within their
/// recorded tolerance of the original files.
pub fn replay(path: &Path, threads: Option<usize>) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let m = RunManifest::parse(&text)?;
    if m.tool != manifest::TOOL || m.version != manifest::VERSION {
        return Err(CliError::new("VersionMismatch", "cli", format!("manifest from {} {}", m.tool, m.version)));
    }
    for input in &m.inputs {
        let p = Path::new(&input.path);
        let bytes = std::fs::read(p).map_err(|e| CliError::io(p, e))?;
        let got = sha256_hex(&bytes);
        if got != input.sha256 {
            return Err(CliError::new("HashMismatch", "cli", format!("{} changed since the run", input.path))
                .with_context(json!({ "path": input.path, "expected": input.sha256, "found": got })));
        }
    }
    let mut argv = vec!["flatlab".to_string()];
    argv.extend(m.argv.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::new("BadManifest", "cli", e.to_string()))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::new("BadManifest", "cli", "a replay cannot replay itself"));
    }
    let scratch = tempfile::tempdir().map_err(|e| CliError::io(Path::new("."), e))?;
    let mut sess = Session::replaying(scratch.path().to_path_buf(), PathBuf::from(&m.cwd));
    with_threads(threads.or(cli.threads), || commands::execute(&cli, &mut sess))??;
    if sess.outputs.len() != m.outputs.len() {
        return Err(CliError::new("OutputDrift", "cli", "the replay produced a different set of outputs"));
    }
    let mut statuses = Vec::new();
    for (want, got) in m.outputs.iter().zip(&sess.outputs) {
        let drift = |why: String| {
            CliError::new("OutputDrift", "cli", format!("{}: {why}", want.path))
                .with_context(json!({ "path": want.path, "expected": want.sha256, "found": got.sha256 }))
        };
        if want.path != got.path {
            return Err(drift(format!("replay wrote {} instead", got.path)));
        }
        if want.sha256 == got.sha256 {
            statuses.push(json!({ "path": want.path, "status": "identical" }));
            continue;
        }
        let kind = want.kind.clone().unwrap_or(OutputKind::Exact);
        if kind == OutputKind::Exact || want.path == STDOUT {
            return Err(drift("content differs".into()));
        }
        let original = std::fs::read(&want.path).map_err(|e| CliError::io(Path::new(&want.path), e))?;
        if sha256_hex(&original) != want.sha256 {
            return Err(drift("original output was modified; nothing to compare against".into()));
        }
        let fresh = std::fs::read(&sess.replayed[&want.path]).map_err(|e| CliError::io(Path::new(&want.path), e))?;
        match kind {
            OutputKind::FloatCsv { rel_tol } => csv_within_tolerance(&original, &fresh, rel_tol).map_err(drift)?,
            OutputKind::FloatJson => {
                let parse = |b: &[u8]| serde_json::from_slice::<serde_json::Value>(b).map_err(|e| drift(e.to_string()));
                if !json_close(&parse(&original)?, &parse(&fresh)?, 1e-9) {
                    return Err(drift("floating values moved beyond 1e-9".into()));
                }
            }
            OutputKind::Exact => unreachable!(),
        }
        statuses.push(json!({ "path": want.path, "status": "within_tolerance" }));
    }
    Ok(json!({ "replay": "ok", "command": m.command, "outputs": statuses }))
}

pub fn absolute_display(p: &Path) -> String {
    absolute(p).display().to_string()
}
