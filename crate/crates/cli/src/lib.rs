//! Command-line front end: training, generation, validation, toy-data
//! simulation and phasor ingestion.

pub mod args;
pub mod bundle;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod reference;

use args::{Cli, Command};
pub use error::CliError;

/// Runs one parsed invocation.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(a) => commands::train::run_train(a).map(drop),
        Command::Generate(a) => commands::generate::run_generate(a).map(drop),
        Command::Validate(a) => commands::validate::run_validate(a).map(drop),
        Command::Simulate(a) => commands::simulate::run_simulate(a),
        Command::Ingest(a) => commands::ingest::run_ingest(a),
    }
}
