//! `hypdeconv`: simulation, deconvolution, rate experiments and the impedance
//! workflow from the command line.
//!
//! Exit codes: 0 success, 2 usage, 3 numerical failure, 1 anything else.
//! Failures print one JSON object on stderr. `HYPDECONV_THREADS` caps the
//! worker pool.

mod args;
mod commands;
mod error;
mod manifest;

use clap::Parser;
use std::process::ExitCode;

fn init_threads() -> Result<(), error::CliError> {
    if let Ok(v) = std::env::var("HYPDECONV_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| error::CliError::Usage(format!("HYPDECONV_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| error::CliError::Other(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|_| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
