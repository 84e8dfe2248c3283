//! `oppsched`: run a scenario file (optionally swept along one axis) and
//! write one result record per grid point.
//!
//! Command-line flags take precedence over the scenario file. Exit codes:
//! 0 on success, 2 for parse, validation and config errors, 3 for runtime
//! and i/o errors. Nothing is written when validation fails.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use oppsched::report::{emit_report, render, run_sweep, Format, Sweep};
use oppsched::scenario::load_scenario;
use oppsched::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "oppsched",
    version,
    about = "Threshold-based opportunistic scheduling simulator"
)]
struct Args {
    /// Scenario file.
    #[arg(long)]
    scenario: PathBuf,
    /// Sweep one axis: `k=1,2,3`, `K=100,1000`, `l=4,49` or `scheme=baseline,capture`.
    #[arg(long)]
    sweep: Option<String>,
    /// Slots per grid point (overrides the file).
    #[arg(long)]
    slots: Option<u64>,
    /// Simulation seed (overrides the file).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFormat,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, default_value_t = default_threads())]
    threads: usize,
    /// Fill the runtime_s column (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Validation(_) | Error::Config(_) => 2,
        _ => 3,
    }
}

fn run(args: &Args) -> Result<(), Error> {
    let mut config = load_scenario(&args.scenario)?;
    if let Some(s) = args.slots {
        config.slots = s;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    config.validate()?;
    let sweep = args.sweep.as_deref().map(Sweep::parse).transpose()?;
    if args.threads == 0 {
        return Err(Error::Validation("--threads must be at least 1".into()));
    }
    let records = run_sweep(&config, sweep.as_ref(), args.threads, args.timing)?;
    let format = match args.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    match &args.out {
        Some(path) => emit_report(&records, format, path),
        None => {
            let body = render(&records, format)?;
            std::io::stdout()
                .lock()
                .write_all(body.as_bytes())
                .map_err(|e| Error::Io(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oppsched: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
