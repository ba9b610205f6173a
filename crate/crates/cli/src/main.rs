//! `relint`: relevance intervals from the command line.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relint: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
