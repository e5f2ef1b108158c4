mod cli;
mod commands;
mod config;
mod error;
mod io;
mod plot;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use error::CliResult;

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Cluster(a) => commands::cluster(a),
        Command::Tune(a) => commands::tune(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Generate(a) => commands::generate_cmd(a),
        Command::Eval(a) => {
            println!("{}", commands::eval(a)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
