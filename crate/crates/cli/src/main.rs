//! `monoproj`: solve, benchmark and profile derivative-free projection
//! methods for constrained monotone equations.

mod commands;
mod config;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use params::UsageError;

#[derive(Parser)]
#[command(name = "monoproj", version, about, long_about = None)]
struct Cli {
    /// Read flat `key = value` defaults from FILE; flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one suite problem from one starting point
    Solve(commands::SolveArgs),
    /// Run a method × problem × dimension × start matrix and write records
    Bench(commands::BenchArgs),
    /// Performance profile (SVG + CSV) from benchmark records
    Profile(commands::ProfileArgs),
    /// Sparse signal recovery through the complementarity reformulation
    Cs(commands::CsArgs),
    /// Regularized logistic regression on a LIBSVM dataset
    Logreg(commands::LogregArgs),
    /// Numerically check the Perry-matrix trace and eigenvalue identities
    VerifyPerry(commands::VerifyPerryArgs),
    /// List the test problems and their sampled monotonicity
    ListProblems(commands::ListProblemsArgs),
}

fn main() -> ExitCode {
    let mut argv: Vec<String> = std::env::args().collect();
    if let Some(path) = config::take_config_flag(&mut argv) {
        match config::load_config(path.as_ref()) {
            Ok(cfg) => config::merge_into_argv(&mut argv, &cfg),
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(exit_code(&e));
            }
        }
    }

    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let result = match cli.command {
        Command::Solve(a) => commands::run_solve(a),
        Command::Bench(a) => commands::bench(a),
        Command::Profile(a) => commands::profile(a),
        Command::Cs(a) => commands::cs(a),
        Command::Logreg(a) => commands::logreg(a),
        Command::VerifyPerry(a) => commands::verify_perry(a),
        Command::ListProblems(a) => commands::list_problems(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 for anything the user can fix by changing arguments, 2 for I/O and
/// data-format problems.
fn exit_code(e: &anyhow::Error) -> u8 {
    if e.is::<UsageError>() {
        return 1;
    }
    match e.downcast_ref::<monoproj::Error>() {
        Some(
            monoproj::Error::InvalidConfig(_)
            | monoproj::Error::Contract(_)
            | monoproj::Error::UnknownProblem(_)
            | monoproj::Error::ExplicitlyUnspecified(_)
            | monoproj::Error::DimensionMismatch { .. },
        ) => 1,
        _ => 2,
    }
}
