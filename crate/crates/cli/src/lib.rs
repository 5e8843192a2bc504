//! Command-line front end: configuration, dispatch, caching, and report
//! emission.
//!
//! Reports are JSON documents whose `timing` block is the only part that can
//! differ between two runs of the same command on the same configuration.

pub mod cache;
mod commands;
pub mod config;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::cache::{sha256_hex, Cache, CacheStatus};
use crate::config::RunConfig;

pub const REPORT_SCHEMA: &str = "gentensor-report/1";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Resource(String),
    Internal(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Resource(m) => write!(f, "resource limit: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gentensor::Error> for CliError {
    fn from(e: gentensor::Error) -> Self {
        match e {
            gentensor::Error::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            gentensor::Error::UnknownClass(_) => CliError::Internal(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gentensor",
    version,
    about = "Generalized tensor products of finite sets"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured word bound.
    #[arg(long, global = true)]
    pub bound: Option<usize>,
    /// Skips the stability check at bound + 1.
    #[arg(long, global = true)]
    pub no_stability: bool,
    /// Directory for cached saturations.
    #[arg(long, global = true, env = "GENTENSOR_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Writes the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Report)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Report,
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Saturates and lists the classes.
    Saturate,
    /// Class counts, separability split, and the class-size histogram.
    Census,
    /// Entanglement verdicts for words such as `(0,1)+(1,0)`.
    Entangled {
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Canonical forms and freeness for words (needs a rule family).
    Canon {
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Exhaustive audits.
    Audit(AuditArgs),
    /// Checks that the configured actions descend to the quotient.
    ActionCheck,
    /// Checks that the `refine` rules induce a finer partition.
    Refine,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["count", "theorem", "canon"])))]
pub struct AuditArgs {
    /// Counts all operations and those with identity closure.
    #[arg(long)]
    pub count: bool,
    #[arg(long, value_enum)]
    pub theorem: Option<Theorem>,
    /// Canonicalizer audit against saturation (needs a rule family).
    #[arg(long)]
    pub canon: bool,
    /// Carrier size for exhaustive audits.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Identity closure, conservative, and alpha_Q form coincide.
    #[value(name = "3.1.5.1.1", alias = "three-way")]
    ThreeWay,
    /// Associativity of alpha_Q versus transitivity of Q.
    #[value(name = "3.1.5.1.3", alias = "associativity")]
    Associativity,
    /// Commutativity of alpha_Q versus Q being the diagonal.
    #[value(name = "3.1.5.1.4", alias = "commutativity")]
    Commutativity,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Saturate => "saturate",
            Command::Census => "census",
            Command::Entangled { .. } => "entangled",
            Command::Canon { .. } => "canon",
            Command::Audit(_) => "audit",
            Command::ActionCheck => "action-check",
            Command::Refine => "refine",
        }
    }

    fn args(&self) -> Value {
        match self {
            Command::Entangled { words } | Command::Canon { words } => {
                serde_json::json!({ "words": words })
            }
            Command::Audit(a) => serde_json::json!({
                "count": a.count,
                "theorem": a.theorem,
                "canon": a.canon,
                "n": a.n,
            }),
            _ => Value::Null,
        }
    }
}

/// Rows for `--format csv`.
pub struct CsvTable {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub results: Value,
    pub csv: Option<CsvTable>,
    pub cache: CacheStatus,
}

#[derive(Serialize)]
struct Timing {
    elapsed_ms: u128,
    cache: CacheStatus,
    parallel: bool,
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'a str,
    tool_version: &'a str,
    command: &'a str,
    args: Value,
    config: Option<&'a RunConfig>,
    config_hash: String,
    results: Value,
    timing: Timing,
}

pub fn load_config(cli: &Cli) -> Result<Option<RunConfig>, CliError> {
    let Some(path) = &cli.config else {
        return Ok(None);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(b) = cli.bound {
        if b == 0 {
            return Err(CliError::Config("--bound: must be at least 1".into()));
        }
        cfg.bound = b;
    }
    if cli.no_stability {
        cfg.stability = false;
    }
    Ok(Some(cfg))
}

/// Runs the command and renders the report (or CSV) as text.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let start = Instant::now();
    let cfg = load_config(cli)?;
    let cache = Cache::new(cli.cache_dir.clone());
    let outcome = commands::run(&cli.command, cfg.as_ref(), &cache)?;
    match cli.format {
        Format::Csv => {
            let table = outcome.csv.ok_or_else(|| {
                CliError::Config(format!(
                    "--format csv is not available for `{}`",
                    cli.command.name()
                ))
            })?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
            w.write_record(&table.headers).map_err(csv_err)?;
            for row in &table.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
        }
        Format::Report => {
            let args = cli.command.args();
            let hash_input = serde_json::json!({
                "schema": REPORT_SCHEMA,
                "command": cli.command.name(),
                "args": args,
                "config": cfg,
            });
            let report = Report {
                schema: REPORT_SCHEMA,
                tool_version: env!("CARGO_PKG_VERSION"),
                command: cli.command.name(),
                args,
                config: cfg.as_ref(),
                config_hash: sha256_hex(&serde_json::to_vec(&hash_input).expect("json")),
                results: outcome.results,
                timing: Timing {
                    elapsed_ms: start.elapsed().as_millis(),
                    cache: outcome.cache,
                    parallel: gentensor::is_parallel(),
                },
            };
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
    }
}

/// Parses arguments, runs, and writes the output. Returns the exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = execute(&cli).and_then(|text| match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gentensor: {e}");
            e.exit_code()
        }
    }
}

/// The report with its `timing` block removed, as canonical JSON bytes.
pub fn report_payload(report: &str) -> Result<Vec<u8>, CliError> {
    let mut v: Value =
        serde_json::from_str(report).map_err(|e| CliError::Internal(e.to_string()))?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timing");
    }
    serde_json::to_vec(&v).map_err(|e| CliError::Internal(e.to_string()))
}
