//! `tempus`: plan, validate, encode, generate and benchmark temporal numeric tasks.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// Process exit statuses.
pub mod status {
    pub const OK: u8 = 0;
    pub const INVALID: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const FAILURE: u8 = 3;
    pub const UNSOLVABLE: u8 = 10;
    pub const ITERATION_LIMIT: u8 = 11;
    pub const TIMEOUT: u8 = 20;
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { status::USAGE } else { status::OK });
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(status::FAILURE)
        }
    }
}
