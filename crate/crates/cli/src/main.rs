//! `seqclass`: runs one experiment and writes a JSON report.
//!
//! Exit status: 0 when the run completes and its checks pass, 2 when it
//! completes with a violated or failed verdict, 1 on any error. Errors are
//! printed to stderr as `{"error": {"code": ..., "message": ...}}`.

mod args;
mod commands;
mod fail;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use args::{load_config, Cli};
use fail::Failure;

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SEQCLASS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(format!("SEQCLASS_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(e.to_string()))
}

fn run() -> Result<bool, Failure> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(true);
        }
        Err(e) => return Err(Failure::usage(e.to_string().trim_end())),
    };
    configure_threads()?;
    let (kind, flags) = cli.command.split();
    let params = match &cli.config {
        Some(path) => flags.or(load_config(path)?),
        None => flags,
    };
    let start = Instant::now();
    let outcome = commands::run(kind, &params)?;
    let elapsed = params.timing.then(|| start.elapsed().as_secs_f64());
    output::emit(kind, &params, outcome, elapsed)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(f) => {
            eprintln!("{}", serde_json::json!({ "error": f }));
            ExitCode::from(1)
        }
    }
}
