//! `mpe`: entropy tables, density samples, verification suites and the
//! general moment pipeline from the command line.
//!
//! Exit codes: 0 pass, 1 failed check, 2 bad input or parameter regime,
//! 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::RunReport;

#[derive(Parser)]
#[command(
    name = "mpe",
    version,
    about = "Entropy of Nevanlinna densities for indeterminate moment problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
pub struct Problem {
    /// Base q of the Al-Salam–Carlitz problem, 0 < q < 1.
    #[arg(long, env = "MPE_Q", default_value_t = 0.6)]
    pub q: f64,
    /// Parameter a, with q < a < 1/q.
    #[arg(long, env = "MPE_A", default_value_t = 1.2)]
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Qseries,
    Measures,
    Pipeline,
    Entropy,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy of ν_ρ for a list of ρ.
    #[command(allow_negative_numbers = true)]
    Table {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.01, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0])]
        rho: Vec<f64>,
        #[arg(long, env = "MPE_TOL", default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Samples of ν_ρ on an even grid, as CSV with header `x,nu`.
    #[command(allow_negative_numbers = true)]
    Density {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = -1.0)]
        xmin: f64,
        #[arg(long, default_value_t = 6.0)]
        xmax: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a gnuplot script plotting the CSV (requires --out).
        #[arg(long)]
        plot_script: Option<PathBuf>,
    },
    /// Run verification suites and report every check.
    Verify {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, env = "MPE_TOL", default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, env = "MPE_PRECISION", default_value_t = 512)]
        precision: usize,
        #[arg(long = "order", short = 'n', env = "MPE_N", default_value_t = 40)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Densities f_{t+iγ} and their entropy from a file of moments.
    #[command(allow_negative_numbers = true)]
    General {
        /// One moment per line, m_0 first; `#` starts a comment.
        #[arg(long)]
        moments: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long = "order", short = 'n', env = "MPE_N", default_value_t = 40)]
        n: usize,
        #[arg(long, env = "MPE_PRECISION", default_value_t = 512)]
        precision: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, env = "MPE_TOL", default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        skip_entropy: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moments of μ_K in the format read by `general`.
    Moments {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value_t = 81)]
        count: usize,
        #[arg(long, env = "MPE_PRECISION", default_value_t = 512)]
        precision: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A command that could not produce a report.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<mpe_core::Error> for Failure {
    fn from(e: mpe_core::Error) -> Self {
        use mpe_core::Error::*;
        let code = match e {
            Domain(_) | Regime(_) | Input(_) => 2,
            NonConvergence(_)
            | Accuracy(_)
            | IllConditioned(_)
            | DivergenceSuspected(_)
            | WindowExhausted(_)
            | Quadrature(_) => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

fn run(cli: Cli) -> Result<Option<RunReport>, Failure> {
    match cli.command {
        Command::Table {
            problem,
            rho,
            tol,
            format,
            out,
        } => commands::table(problem, &rho, tol, format, out.as_deref()).map(Some),
        Command::Density {
            problem,
            rho,
            xmin,
            xmax,
            points,
            out,
            plot_script,
        } => commands::density(
            problem,
            rho,
            xmin,
            xmax,
            points,
            out.as_deref(),
            plot_script.as_deref(),
        )
        .map(|()| None),
        Command::Verify {
            problem,
            suite,
            tol,
            precision,
            n,
            format,
            out,
        } => {
            let report = verify::run(problem, suite, tol, precision, n)?;
            commands::emit_report(&report, format, out.as_deref())?;
            Ok(Some(report))
        }
        Command::General {
            moments,
            t,
            gamma,
            n,
            precision,
            x,
            tol,
            skip_entropy,
            format,
            out,
        } => {
            let opts = commands::GeneralOptions {
                t,
                gamma,
                n,
                precision,
                tol,
                entropy: !skip_entropy,
            };
            commands::general(&moments, &opts, &x, format, out.as_deref()).map(Some)
        }
        Command::Moments {
            problem,
            count,
            precision,
            out,
        } => commands::moments(problem, count, precision, out.as_deref()).map(|()| None),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Some(report)) if !report.passed() => ExitCode::from(report.error_code.unwrap_or(1)),
        Ok(_) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mpe: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
