//! `heatsample` command-line driver.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 I/O failure,
//! 4 numerical failure, 130 interrupted (partial outputs are written).

mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::Parser;
use heatsample_core::Error;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
    Interrupted,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Interrupted => 130,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Numerical(m) => f.write_str(m),
            CliError::Interrupted => f.write_str("interrupted; partial results written"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io { .. } => CliError::Io(msg),
            Error::Numerical(_) | Error::UndefinedMetric(_) => CliError::Numerical(msg),
            _ => CliError::Usage(msg),
        }
    }
}

fn run() -> Result<(), CliError> {
    let argv = config::merge(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let cancel = Arc::new(AtomicBool::new(false));
    {
        let flag = Arc::clone(&cancel);
        if let Err(e) = ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst)) {
            log::warn!("could not install interrupt handler: {e}");
        }
    }

    match &cli.command {
        Command::Graph(c) => commands::graph(c),
        Command::Coherence(c) => commands::coherence(c),
        Command::Sample(c) => commands::sample(c),
        Command::Recover(c) => commands::recover(c),
        Command::Phase(c) => commands::phase(c, &cancel),
        Command::Noisy(c) => commands::noisy(c, &cancel),
        Command::Bounds(c) => commands::bounds(c),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
