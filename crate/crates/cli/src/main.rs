//! `scalecalc`: solve, verify and derive variational problems from JSON
//! problem files, and check the calculus identities on test functions.
//!
//! Exit codes: 0 success, 1 input error (schema, parse, grid mismatch),
//! 2 no transversality root, 3 indeterminate terminal time, 4 verdict false
//! or numerical failure.

mod commands;
mod identities;
mod problem;
mod report;
mod trajectory;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::problem::Overrides;

#[derive(Debug)]
pub enum Failure {
    /// Unreadable, malformed or inconsistent input.
    Input(String),
    /// Output could not be written.
    Io(String),
    /// A numerical step failed after the input was accepted.
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) | Failure::Io(_) => 1,
            Failure::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) | Failure::Io(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "scalecalc", version, about = "Scale calculus at finite step h")]
struct Cli {
    /// Residual tolerance for the verdict (overrides the problem file).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Grid step (overrides the problem file's grid).
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Number of terminal-time scan points.
    #[arg(long, global = true)]
    scan_points: Option<usize>,
    /// Directory for report.json, identities.json and trajectory CSVs.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    /// Suppress the summary on stdout.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file; writes report.json and one trajectory CSV per root.
    Solve { problem: PathBuf },
    /// Check a candidate trajectory CSV against a problem file.
    Verify {
        problem: PathBuf,
        candidate: PathBuf,
        /// Terminal time; defaults to the fixed T, else the last core node.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Residual ladders of the Leibniz, Barrow, parts and Taylor rules.
    Identities {
        /// sin, cos, exp, poly_k, quadratic_shift(c) or weierstrass[:amp,freq[,terms]].
        #[arg(long)]
        function: String,
        /// Second function for the product rules; defaults to --function.
        #[arg(long)]
        with: Option<String>,
        /// Interval as a,b (default 0,1).
        #[arg(long, allow_hyphen_values = true)]
        interval: Option<String>,
        /// Steps as h0,ratio,rungs.
        #[arg(long)]
        ladder: Option<String>,
    },
    /// Print the Euler-Lagrange equation and endpoint conditions.
    Derive { problem: PathBuf },
}

fn run(cli: Cli) -> Result<report::Status, Failure> {
    let o = Overrides {
        tol: cli.tol,
        h: cli.h,
        scan_points: cli.scan_points,
    };
    let out = &cli.output_dir;
    match cli.command {
        Command::Solve { problem } => commands::solve(&problem, out, o, cli.quiet),
        Command::Verify {
            problem,
            candidate,
            t_end,
        } => commands::verify(&problem, &candidate, t_end, out, o, cli.quiet),
        Command::Identities {
            function,
            with,
            interval,
            ladder,
        } => {
            let req = identities::Request {
                f: function.parse()?,
                g: with.as_deref().map(str::parse).transpose()?,
                interval: interval.as_deref().map(identities::parse_interval).transpose()?,
                ladder: ladder.as_deref().map(str::parse).transpose()?,
            };
            identities::run(req, out, cli.quiet)
        }
        Command::Derive { problem } => commands::derive(&problem, o),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
