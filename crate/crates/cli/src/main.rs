use std::process::ExitCode;
use std::time::Instant;
use std::{env, fs};

use clap::Parser;
use tfv_cli::config::RunConfig;
use tfv_cli::{run, Cli, CliError, Command};

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = env::var("TFV_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("TFV_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))
}

fn write(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn main_inner(cli: &Cli) -> Result<i32, CliError> {
    init_threads()?;
    let cfg = RunConfig::resolve(&cli.flags)?;
    let started = Instant::now();
    let outcome = run(cli.cmd, &cfg)?;
    for (path, text) in &outcome.files {
        write(path, text)?;
    }
    let json = outcome.report.to_json();
    match &cfg.out {
        Some(path) => write(path, &json)?,
        None => print!("{json}"),
    }
    if cli.cmd == Command::Suite {
        for line in tfv_cli::suite::summary_lines(&outcome.report) {
            eprintln!("{line}");
        }
    }
    eprintln!("wall-clock: {:.3} s", started.elapsed().as_secs_f64());
    Ok(outcome.report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("tfv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
