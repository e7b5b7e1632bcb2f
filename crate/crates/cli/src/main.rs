//! `orthoscherk`: solve, mesh, verify and probe orthodisk Scherk surfaces.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver non-convergence,
//! 4 verification failure. `ORTHOSCHERK_THREADS` sets the worker count.

mod config;
mod error;
mod json;
mod run;

use clap::Parser;
use config::{Cli, RunConfig};
use error::{CliError, EXIT_OK};

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ORTHOSCHERK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Validation(format!("ORTHOSCHERK_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot start {n} worker threads: {e}")))
}

fn main() {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| RunConfig::from_cli(&cli)).and_then(|cfg| run::run(&cfg));
    let code = match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
