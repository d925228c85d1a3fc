//! `deloc` command-line driver: reads a run configuration, runs one
//! computation and writes a JSON report.
//!
//! Exit codes: 0 when every certificate passes, 1 when one fails, 2 for
//! configuration errors and 3 for IO errors. `DELOC_THREADS` sets the number
//! of worker threads; reports do not depend on it.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

/// Bumped whenever report fields change meaning.
const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "deloc", version, about = "Delocalized eta invariants and cyclic cocycle pairings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration: dotted `key = value` text or JSON.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override `tolerances.tol`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the sampled integrand as CSV (`t,re,im,bound`).
    #[arg(long, global = true, value_name = "PATH")]
    dump_integrand: Option<PathBuf>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, short, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Delocalized eta invariant at a conjugacy class.
    Eta,
    /// Higher eta invariant for an even cyclic cocycle.
    HigherEta,
    /// Certified spectral gap of the operator.
    Gap,
    /// Norms of a group-algebra element.
    Norms,
    /// Cyclicity, cocycle, support and growth checks of a cochain.
    CocycleCheck,
    /// Boundary identity and local-loop vanishing for idempotents.
    BoundaryCheck,
    /// Backend functional calculus against the dense truncation oracle.
    OracleCompare,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Eta => "eta",
            Command::HigherEta => "higher-eta",
            Command::Gap => "gap",
            Command::Norms => "norms",
            Command::CocycleCheck => "cocycle-check",
            Command::BoundaryCheck => "boundary-check",
            Command::OracleCompare => "oracle-compare",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Certificate(String),
    Io(String),
}

impl From<deloc::Error> for CliError {
    fn from(e: deloc::Error) -> Self {
        use deloc::Error::*;
        match e {
            Representation(_) | Shape(_) | Precondition(_) | Unsupported(_) => CliError::Config(e.to_string()),
            Resource(_) | NotFound(_) | Certificate(_) => CliError::Certificate(e.to_string()),
        }
    }
}

impl CliError {
    fn exit(&self) -> ExitCode {
        match self {
            CliError::Certificate(m) => {
                eprintln!("certificate failure: {m}");
                ExitCode::from(1)
            }
            CliError::Config(m) => {
                eprintln!("configuration error: {m}");
                ExitCode::from(2)
            }
            CliError::Io(m) => {
                eprintln!("IO error: {m}");
                ExitCode::from(3)
            }
        }
    }
}

fn set_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DELOC_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("DELOC_THREADS must be a positive integer, got '{v}'")))?;
    if n == 0 {
        return Err(CliError::Config("DELOC_THREADS must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    set_threads()?;
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = config::parse(&text).map_err(CliError::Config)?;
    if let Some(t) = cli.tol {
        cfg.tolerances.tol = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(p) = &cli.output {
        cfg.output.report = Some(p.display().to_string());
    }
    if let Some(p) = &cli.dump_integrand {
        cfg.output.integrand = Some(p.display().to_string());
    }
    config::validate(&cfg).map_err(CliError::Config)?;

    let outcome = match cli.command {
        Command::Eta => commands::eta(&cfg),
        Command::HigherEta => commands::higher_eta(&cfg),
        Command::Gap => commands::gap(&cfg),
        Command::Norms => commands::norms(&cfg),
        Command::CocycleCheck => commands::cocycle_check(&cfg),
        Command::BoundaryCheck => commands::boundary_check(&cfg),
        Command::OracleCompare => commands::oracle_compare(&cfg),
    }?;

    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": cli.command.name(),
        "config": cfg,
        "passed": outcome.failures.is_empty(),
        "failures": outcome.failures,
        "provenance": {
            "crate_version": env!("CARGO_PKG_VERSION"),
            "mu": deloc::operators::MU,
            "constants": "growth constants are empirical fits on finite balls; tail constants of higher eta are fitted",
        },
    });
    if let (Some(obj), Some(res)) = (report.as_object_mut(), outcome.result.as_object()) {
        for (k, v) in res {
            obj.insert(k.clone(), v.clone());
        }
    }
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    match &cfg.output.report {
        Some(p) => std::fs::write(p, &text).map_err(|e| CliError::Io(format!("{p}: {e}")))?,
        None => print!("{text}"),
    }
    if let Some(p) = &cfg.output.integrand {
        let csv = outcome
            .csv
            .ok_or_else(|| CliError::Config(format!("{} has no integrand to dump", cli.command.name())))?;
        std::fs::write(p, csv).map_err(|e| CliError::Io(format!("{p}: {e}")))?;
    }
    for f in &outcome.failures {
        eprintln!("certificate failure: {f}");
    }
    Ok(outcome.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => e.exit(),
    }
}
