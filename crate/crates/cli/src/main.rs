use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod error;
mod report;

use config::{load_substitution, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli
        .opts
        .check()
        .and_then(|()| load_substitution(cli.command.subst()))
        .and_then(|src| commands::run(&cli.command, &src, &cli.opts));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
