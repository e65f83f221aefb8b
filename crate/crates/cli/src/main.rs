//! `gaussot`: command-line front end.
//!
//! Exit codes: 0 success, 1 a `verify` check failed, 2 usage or input error,
//! 3 numerical failure.

mod args;
mod commands;
mod document;
mod error;
mod verify;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Distance(pair) => commands::distance(cli, pair),
        Command::Coupling(pair) => commands::coupling(cli, pair),
        Command::Sample { pair, n } => commands::sample(cli, pair, *n),
        Command::Barycenter { files, weights, alpha } => {
            commands::barycenter(cli, files, weights.as_deref(), *alpha)
        }
        Command::Verify { pair, mc_samples } => verify::verify(cli, pair, *mc_samples),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("gaussot: {e}");
        std::process::exit(e.exit_code());
    }
}
