//! Command line front end: scenario files in, canonical reports out.

pub mod report;
pub mod run;
pub mod scenario;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub use report::{golden_compare, parse_golden, GoldenDiff, Report, Value};
pub use scenario::{Mode, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Engine(#[from] effcon::Error),
}

#[derive(Parser, Debug)]
#[command(name = "effcon", version, about = "Effective constraints of quantum constrained systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate an expression containing Poisson brackets `{a,b}`
    Bracket {
        expr: String,
        /// Take pair labels from this scenario instead of `q, p`
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Generate the constraint hierarchy
    Generate(RunArgs),
    /// Close the set under brackets and check first-class behaviour
    Close(RunArgs),
    /// Truncate every constraint at the chosen order
    Truncate(RunArgs),
    /// Solve the truncated constraints
    Solve(RunArgs),
    /// Gauge flows of the constraints on the free generators
    Flows(RunArgs),
    /// Search for observables and evaluate the algebra of named ones
    Observables(RunArgs),
    /// Gauge fix and build the Dirac bracket
    Dirac(RunArgs),
    /// Consistency, uncertainty, reality and golden checks
    Check {
        #[command(flatten)]
        run: RunArgs,
        /// Sharp truncation at this order
        #[arg(long)]
        sharp: Option<u32>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Scenario file
    pub scenario: PathBuf,
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Label of the pair used as internal time
    #[arg(long)]
    pub time: Option<String>,
    #[arg(long)]
    pub kmax: Option<u32>,
    /// Extra golden expectations
    #[arg(long)]
    pub golden: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Output {
    /// Directory receiving report.txt and report.kv
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Sharp,
    Graded,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

/// Parse arguments, run, print the report; returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let output = match &cli.command {
        Command::Bracket { output, .. } => output.clone(),
        Command::Check { run, .. } => run.output.clone(),
        Command::Generate(r)
        | Command::Close(r)
        | Command::Truncate(r)
        | Command::Solve(r)
        | Command::Flows(r)
        | Command::Observables(r)
        | Command::Dirac(r) => r.output.clone(),
    };
    match run::execute(&cli.command) {
        Ok(outcome) => {
            let body = match output.format {
                Format::Text => outcome.report.to_text(),
                Format::Machine => outcome.report.to_kv(),
            };
            let _ = write!(out, "{body}");
            for m in &outcome.report.messages {
                let _ = writeln!(err, "{m}");
            }
            if let Some(dir) = &output.out {
                if let Err(e) = outcome.report.write(dir) {
                    let _ = writeln!(err, "{e}");
                    return 2;
                }
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
