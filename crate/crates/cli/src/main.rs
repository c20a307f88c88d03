//! `pgrad`: command-line front end for the `pgrad` library.
//!
//! Exit codes: 0 success, 1 failed verification, 2 input error,
//! 3 domain or numerical error, 4 inconclusive classification.

mod args;
mod commands;
mod config;
mod error;
mod output;

use clap::Parser;

use args::{Cli, Command};
use error::{exit, CliError};

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    let mut opts = cli.opts;
    if let Some(path) = opts.config.clone() {
        config::merge_file(&mut opts, &path)?;
    }
    log::debug!("options: {opts:?}");
    match cli.command {
        Command::Constants => commands::constants(&opts),
        Command::Family => commands::family(&opts),
        Command::Verify { which } => commands::verify(&opts, which),
        Command::Classify { input } => commands::classify_file(&opts, &input),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PGRAD_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::SUCCESS };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(outcome) => outcome.code,
        Err(e) => {
            eprintln!("pgrad: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
