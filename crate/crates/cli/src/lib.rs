//! Command-line front end: instance bundles, claim checks, rollouts and the
//! SAT reduction, each producing a JSON run report.

pub mod args;
pub mod bundle;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::io::Write;
use std::time::Instant;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{exit, CliError};

/// Parse `argv`, run the command and write the report. Returns the exit code.
pub fn main_with(argv: Vec<String>) -> u8 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let started = Instant::now();
    match commands::execute(&cli, &argv[1..]).and_then(|mut report| {
        if cli.common.timing {
            report.wallclock_ms = Some(started.elapsed().as_millis() as u64);
        }
        emit(&cli, &report.to_json())?;
        Ok(report.all_passed())
    }) {
        Ok(true) => exit::OK,
        Ok(false) => exit::VERIFICATION_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(cli: &Cli, json: &str) -> Result<(), CliError> {
    match (&cli.common.out, &cli.command) {
        (Some(path), c) if !matches!(c, Command::Gen(_)) => {
            std::fs::write(path, json).map_err(|e| CliError::io(path, e))
        }
        _ => std::io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}
