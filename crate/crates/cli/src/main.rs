//! `critset`: command-line analysis of the critical set of `-u'' + f(u)`.
//!
//! Exit codes: 0 on success, 1 on numerical failure or failed verify checks,
//! 2 on configuration or input errors.

mod commands;
mod config;
mod output;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use critset::verify::Group;

use crate::config::RunConfig;
use crate::output::Sink;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
    Io(io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numeric(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<critset::Error> for CliError {
    fn from(e: critset::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Parser)]
#[command(
    name = "critset",
    version,
    about = "Critical sets of -u'' + f(u) with Dirichlet conditions on [0, pi]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Argument W(u)(pi) of the linearized solution and its path.
    Argument(Common),
    /// A point of a level set or critical component.
    Critical(Common),
    /// Scans of W along a line and of the constant-potential argument.
    Scan(Common),
    /// Runs the property suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run a single group.
        #[arg(long, value_name = "GROUP")]
        only: Option<Group>,
    },
    /// Counts solutions of -u'' + f(u) = g by shooting.
    Count(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Directory for output files (overrides `output.path`).
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Worker threads; affects wall time only.
    #[arg(long, value_name = "N")]
    threads: Option<NonZeroUsize>,
}

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    let (common, only) = match &cli.command {
        Command::Argument(c) | Command::Critical(c) | Command::Scan(c) | Command::Count(c) => {
            (c, None)
        }
        Command::Verify { common, only } => (common, *only),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.get())
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot configure {n} threads: {e}")))?;
    }
    let text = fs::read_to_string(&common.config)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", common.config.display())))?;
    let cfg = RunConfig::parse(&text)?.resolve()?;
    let sink = Sink::new(
        common
            .output
            .clone()
            .or_else(|| cfg.raw.output.path.clone()),
    )?;
    match cli.command {
        Command::Argument(_) => commands::argument(&cfg, &sink),
        Command::Critical(_) => commands::critical(&cfg, &sink),
        Command::Scan(_) => commands::scan(&cfg, &sink),
        Command::Verify { .. } => commands::verify(&cfg, &sink, only),
        Command::Count(_) => commands::count(&cfg, &sink),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout
                .write_all(out.stdout.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::from(u8::from(out.failed))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
