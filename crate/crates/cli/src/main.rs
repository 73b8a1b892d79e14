//! `zok` command-line tool. Exit codes: 0 on success, 1 for invalid input
//! or arguments, 2 for filesystem failures.

mod cli;
mod commands;
mod config;
mod files;

use std::process::ExitCode;

use zok_core::Error;

pub enum Failure {
    Usage(clap::Error),
    Run(Error),
}

impl From<clap::Error> for Failure {
    fn from(e: clap::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn run() -> Result<(), Failure> {
    let loaded = config::load(std::env::args_os().collect())?;
    if let Some(n) = loaded.cli.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::invalid(e.to_string()))?;
    }
    commands::dispatch(loaded.cli, loaded.pipeline)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            let _ = e.print();
            if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
