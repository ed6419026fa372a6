//! `gaussct`: command-line front end for covariance-matrix analysis and
//! quadratic-Hamiltonian dynamics.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 validation failure
//! (unphysical state, non-symplectic matrix, singular coefficient), 3 runtime
//! failure (integration blow-up).

mod commands;
mod input;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussct_core::Error;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn from_core(err: Error) -> Self {
        let code = match err {
            Error::NotSymplectic { .. }
            | Error::NotSymmetric(_)
            | Error::NotPositiveDefinite(_)
            | Error::SingularCoefficient { .. } => EXIT_VALIDATION,
            Error::BlowUp { .. } => EXIT_RUNTIME,
            Error::Shape { .. }
            | Error::NonFinite
            | Error::TimeOutOfRange { .. }
            | Error::InvalidParameter(_)
            | Error::Expression(_) => EXIT_USAGE,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }

    pub fn context(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

/// A command's report together with an optional failure that should set the
/// exit code after the report has been written (for example an unphysical
/// state, which is still fully described).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub failure: Option<CliError>,
    /// The command already wrote its `--out` file; the report goes to stdout.
    pub stdout: bool,
}

impl Outcome {
    pub fn ok(report: String) -> Self {
        Self {
            report,
            failure: None,
            stdout: false,
        }
    }

    pub fn failed(report: String, failure: CliError) -> Self {
        Self {
            report,
            failure: Some(failure),
            stdout: false,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Human-readable report.
    Table,
    /// Comma-separated `name,value` records (trajectories for `evolve`).
    Records,
}

#[derive(Debug, Parser)]
#[command(
    name = "gaussct",
    version,
    about = "Gaussian states under linear canonical transformations"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Symplecticity / residual tolerance.
    #[arg(long, global = true, env = "GAUSSCT_TOL", default_value_t = 1e-9)]
    pub tol: f64,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override (or supply) hbar for state files.
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct Window {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub t1: f64,
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    pub dt: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Physicality, Robertson defect and symplectic-uncertainty test of a state.
    Check {
        #[arg(long, visible_alias = "input")]
        state: PathBuf,
    },
    /// Symplectic diagonalization, Heisenberg products and minimality.
    Williamson {
        #[arg(long, visible_alias = "input")]
        state: PathBuf,
    },
    /// Propagate a state under a quadratic Hamiltonian.
    Evolve {
        #[arg(long)]
        hamiltonian: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        window: Window,
        /// Write every n-th sample (the final sample is always written).
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Transform mapping a stationary Hamiltonian onto an oscillator target.
    Diagonalize {
        #[arg(long)]
        hamiltonian: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
    },
    /// Frequency of the one-mode classical oscillator on a time grid.
    Omega {
        #[arg(long, visible_alias = "input")]
        hamiltonian: PathBuf,
        #[command(flatten)]
        window: Window,
    },
    /// Determinant and trace invariants, optionally before and after a matrix.
    Invariants {
        #[arg(long, visible_alias = "input")]
        state: PathBuf,
        #[arg(long)]
        symplectic: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let c = &cli.common;
    if !(c.tol > 0.0 && c.tol.is_finite()) {
        return Err(CliError::usage(format!(
            "--tol must be positive, got {}",
            c.tol
        )));
    }
    match &cli.command {
        Command::Check { state } => commands::check(c, state),
        Command::Williamson { state } => commands::williamson(c, state),
        Command::Evolve {
            hamiltonian,
            state,
            window,
            stride,
        } => commands::evolve(c, hamiltonian, state, window, *stride),
        Command::Diagonalize {
            hamiltonian,
            target,
            t,
        } => commands::diagonalize(c, hamiltonian, target, *t),
        Command::Omega {
            hamiltonian,
            window,
        } => commands::omega(c, hamiltonian, window),
        Command::Invariants { state, symplectic } => {
            commands::invariants(c, state, symplectic.as_deref())
        }
    }
}

fn emit(common: &Common, outcome: &Outcome) -> Result<(), CliError> {
    let text = &outcome.report;
    match common.out.as_ref().filter(|_| !outcome.stdout) {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let common = cli.common.clone();
    let failure = match run(cli) {
        Ok(outcome) => match emit(&common, &outcome) {
            Ok(()) => outcome.failure,
            Err(e) => Some(e),
        },
        Err(e) => Some(e),
    };
    match failure {
        None => ExitCode::SUCCESS,
        Some(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code)
        }
    }
}
