//! `hitchin`: solves, sweeps and reports for the model-disk computations.

mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::Parser;

use config::{Command, Flags, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hitchin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(cli.command, &cli.flags)?;
    if let Some(jobs) = cfg.jobs {
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    commands::run(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = e.record();
            match hitchin_core::report::to_json_string(&record) {
                Ok(text) => eprint!("{text}"),
                Err(_) => eprintln!("error: {e}"),
            }
            ExitCode::from(record.exit_code)
        }
    }
}
