//! Command-line front end: validate models, check formulas, simulate plays,
//! encode counter machines and export configuration graphs.
//!
//! Every command prints one JSON report on stdout. Exit codes:
//! 0 success (including an `Unknown` verdict), 1 the model or the requested
//! play was rejected, 2 unreadable or malformed input, 3 the chosen engine
//! cannot handle the instance.

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcgmp::dynamics::Configuration;
use gcgmp::logic::StrategyClass;
use gcgmp::model::load_model;
use gcgmp::{Model, Payoff, Scalar};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Parser)]
#[command(name = "gcgmp", version, about = "Model checking for guarded concurrent games with payoffs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file for structural errors.
    Validate { model: PathBuf },
    /// Decide a formula at a configuration.
    Check(CheckArgs),
    /// Play a script of profiles or a strategy profile.
    Simulate(SimulateArgs),
    /// Encode a two-counter machine as a model.
    EncodeTcm(EncodeArgs),
    /// Write the configuration graph in DOT format.
    ExportGraph(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Auto,
    Atl,
    Saturated,
    Bounded,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub model: PathBuf,
    pub formula: String,
    #[arg(long, value_enum, default_value = "auto")]
    pub engine: Engine,
    /// Proponent strategy class, e.g. `m/c` or `perfect-recall/state`.
    #[arg(long, default_value = "m/c")]
    pub sp: StrategyClass,
    /// Opponent strategy class.
    #[arg(long, default_value = "m/c")]
    pub so: StrategyClass,
    /// Maximal play depth of the bounded engine.
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value_t = 4096)]
    pub max_strategies: usize,
    #[arg(long, default_value_t = 2_000_000)]
    pub max_nodes: usize,
    /// Initial configuration `STATE` or `STATE:U1,U2,...`.
    #[arg(long)]
    pub init: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ValueKind {
    Total,
    Discounted,
    Mean,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("moves").required(true))]
pub struct SimulateArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub init: Option<String>,
    /// Profiles separated by `;`, actions in agent order separated by `,`.
    #[arg(long, group = "moves")]
    pub profiles: Option<String>,
    /// JSON list of profiles, each a list of actions in agent order or an
    /// object from agent to action.
    #[arg(long, group = "moves")]
    pub profile_script: Option<PathBuf>,
    /// JSON object from agent to a table from observation to action; a
    /// `check` report or its witness is accepted as is.
    #[arg(long, group = "moves")]
    pub strategy_file: Option<PathBuf>,
    /// Number of steps; defaults to the script length, or 10 with strategies.
    #[arg(long)]
    pub steps: Option<usize>,
    /// How play values are aggregated; defaults to the model's setting.
    #[arg(long, value_enum)]
    pub value: Option<ValueKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    /// Zero tests as guards, formula `<<1>> F halt`.
    Guard,
    /// Constant guards, zero tests in the formula.
    State,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub machine: PathBuf,
    #[arg(long, value_enum, default_value = "guard")]
    pub variant: VariantArg,
    /// Output model file; without it the model is printed instead of a report.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Include the formula to check in the report.
    #[arg(long)]
    pub emit_formula: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub init: Option<String>,
    /// Number of steps to explore.
    #[arg(long, default_value_t = 2)]
    pub bound: usize,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    /// Output DOT file; without it the graph is printed instead of a report.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// A failed run: exit code and message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    /// Extra fields for the report, such as a partial trace.
    pub details: Value,
}

impl Failure {
    pub fn input(message: impl ToString) -> Self {
        Failure { code: 2, message: message.to_string(), details: Value::Null }
    }

    pub fn rejected(message: impl ToString, details: Value) -> Self {
        Failure { code: 1, message: message.to_string(), details }
    }

    pub fn engine(message: impl ToString) -> Self {
        Failure { code: 3, message: message.to_string(), details: Value::Null }
    }
}

/// What a command prints: a JSON report, or a raw artifact when no output
/// file was requested.
pub enum Output {
    Report { code: i32, report: Value },
    Artifact(String),
}

/// Runs the command line `args` (including the program name), writing the
/// report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(if code == 0 { &mut *out as &mut dyn Write } else { err }, "{e}");
            return code;
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    if let Err(f) = configure_threads() {
        return finish(&echo, Err(f), None, out, err);
    }
    let start = Instant::now();
    let result = match &cli.command {
        Command::Validate { model } => commands::validate(model),
        Command::Check(a) => commands::check(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::EncodeTcm(a) => commands::encode_tcm(a),
        Command::ExportGraph(a) => commands::export_graph(a),
    };
    let timed = matches!(cli.command, Command::Check(_) | Command::Simulate(_));
    finish(&echo, result, timed.then(|| start.elapsed().as_millis()), out, err)
}

fn finish(
    echo: &[String],
    result: Result<Output, Failure>,
    millis: Option<u128>,
    out: &mut impl Write,
    err: &mut impl Write,
) -> i32 {
    let (code, mut report) = match result {
        Ok(Output::Artifact(text)) => {
            let _ = write!(out, "{text}");
            return 0;
        }
        Ok(Output::Report { code, report }) => (code, report),
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            let mut report = json!({ "error": f.message });
            if let Value::Object(extra) = f.details {
                report.as_object_mut().expect("object").extend(extra);
            }
            (f.code, report)
        }
    };
    let fields = report.as_object_mut().expect("reports are objects");
    fields.insert("command".into(), json!(echo));
    fields.insert("exit_code".into(), json!(code));
    if let Some(ms) = millis {
        fields.insert("wall_time_ms".into(), json!(ms as u64));
    }
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"));
    code
}

/// Caps the global thread pool at `GCGMP_THREADS` if set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(text) = std::env::var("GCGMP_THREADS") else { return Ok(()) };
    let n: usize = text
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::input(format!("GCGMP_THREADS must be a positive integer, got `{text}`")))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub(crate) fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

/// Parses a model file; the digest is over the canonical serialization, so
/// formatting and key order do not change it.
pub(crate) fn load(path: &Path) -> Result<(Model, String), Failure> {
    let m: Model = load_model(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(gcgmp::model::to_json(&m).as_bytes());
    Ok((m, format!("sha256:{digest:x}")))
}

/// Loads a model and rejects it if it is not well formed.
pub(crate) fn load_valid(path: &Path) -> Result<(Model, String), Failure> {
    let (m, hash) = load(path)?;
    let violations = m.validate();
    if !violations.is_empty() {
        let shown: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure::rejected(
            format!("model is not well formed: {}", shown.join("; ")),
            json!({ "violations": violations }),
        ));
    }
    Ok((m, hash))
}

/// `STATE` or `STATE:U1,U2,...`; without it, the least state name with zero
/// utilities.
pub(crate) fn initial(m: &Model, text: Option<&str>) -> Result<Configuration<Payoff>, Failure> {
    let Some(text) = text else {
        let least = (0..m.num_states()).min_by_key(|&s| &m.states()[s]).expect("models have states");
        return Ok(Configuration::zero(least, m.num_agents()));
    };
    let (name, utilities) = match text.split_once(':') {
        Some((s, u)) => (s.trim(), Some(u)),
        None => (text.trim(), None),
    };
    let state = m.state_index(name).ok_or_else(|| Failure::input(format!("unknown state `{name}` in --init")))?;
    let Some(utilities) = utilities else {
        return Ok(Configuration::zero(state, m.num_agents()));
    };
    let values: Vec<Payoff> = utilities
        .split(',')
        .map(|u| Payoff::parse_rational(u.trim()).ok_or_else(|| Failure::input(format!("bad utility `{u}` in --init"))))
        .collect::<Result<_, _>>()?;
    if values.len() != m.num_agents() {
        return Err(Failure::input(format!("--init gives {} utilities for {} agents", values.len(), m.num_agents())));
    }
    Ok(Configuration::new(state, values))
}

/// The `--init` spelling of a configuration.
pub(crate) fn init_text(m: &Model, c: &Configuration<Payoff>) -> String {
    let u: Vec<String> = c.utilities.iter().map(|u| u.to_string()).collect();
    format!("{}:{}", m.states()[c.state], u.join(","))
}
