//! Command-line driver for the qcflat library.
//!
//! Subcommands: constants | verify | schottky | nayatani | green-eval.
//! Every run is described by (config, seed) and emits a JSON report that
//! embeds the resolved configuration, its hash, and the library version,
//! so identical inputs reproduce identical bytes up to the timestamp.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 numerical disagreement,
//! 3 unverified group, 64 usage error, 70 runtime failure.

mod commands;
mod config;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qcflat", version, about = "Flat-model quaternionic contact geometry driver")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the Green normalization constant by two quadrature routes
    Constants(commands::ConstantsArgs),
    /// Run the identity and invariance verification suites
    Verify(commands::VerifyArgs),
    /// Build a Schottky group, enumerate its orbit, estimate the exponent
    Schottky(commands::SchottkyArgs),
    /// Curvature-sign pipeline for a group or a synthetic measure
    Nayatani(commands::NayataniArgs),
    /// Evaluate the Green kernels on a ladder of separations
    GreenEval(commands::GreenEvalArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Cmd::Constants(a) => commands::cmd_constants(a),
        Cmd::Verify(a) => commands::cmd_verify(a),
        Cmd::Schottky(a) => commands::cmd_schottky(a),
        Cmd::Nayatani(a) => commands::cmd_nayatani(a),
        Cmd::GreenEval(a) => commands::cmd_green_eval(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(commands::CmdError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(64)
        }
        Err(commands::CmdError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(70)
        }
    }
}
