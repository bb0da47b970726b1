//! `tcq`: spectrum scans, flux-pulse synthesis, open-system evolution and
//! stabilizer compilation from JSON configuration files.
//!
//! Exit codes: 0 success, 1 I/O, 2 configuration, 3 synthesis, 4 integration.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use tcq_core::opcore::Axis;

use crate::config::{load, CompileConfig, SCHEMA_VERSION};
use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Parser)]
#[command(name = "tcq", version, about = "Tunable-coupling transmon collective-gate toolkit")]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long, conflicts_with_all = ["axis", "n", "theta"])]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_axis, requires_all = ["n", "theta"])]
    axis: Option<Axis>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum and charge matrix elements over a flux grid.
    ScanSpectrum(Io),
    /// Flux trajectory for a two-tone coupling schedule, with spectra.
    Synthesize(Io),
    /// Lindblad evolution of TCQs and resonator.
    Evolve(Io),
    /// Stabilizer gate sequence with dense verification.
    Compile(CompileArgs),
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    match s {
        "x" | "X" => Ok(Axis::X),
        "y" | "Y" => Ok(Axis::Y),
        _ => Err(format!("axis must be x or y, got `{s}`")),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let start = Instant::now();
    let (name, config, out, files) = match &cli.command {
        Command::ScanSpectrum(io) => {
            let cfg = load(&io.config)?;
            ("scan-spectrum", Some(io.config.as_path()), io.out.as_path(), commands::scan_spectrum(&cfg, &io.out)?)
        }
        Command::Synthesize(io) => {
            let cfg = load(&io.config)?;
            ("synthesize", Some(io.config.as_path()), io.out.as_path(), commands::synthesize_cmd(&cfg, &io.out)?)
        }
        Command::Evolve(io) => {
            let cfg = load(&io.config)?;
            ("evolve", Some(io.config.as_path()), io.out.as_path(), commands::evolve(&cfg, &io.out)?)
        }
        Command::Compile(args) => {
            let cfg = match (&args.config, args.axis, args.n, args.theta) {
                (Some(path), ..) => load(path)?,
                (None, Some(axis), Some(n_qubits), Some(theta)) => {
                    CompileConfig { schema_version: SCHEMA_VERSION, axis, n_qubits, theta }
                }
                _ => return Err(CliError::Config("compile needs --config or --axis/--n/--theta".into())),
            };
            ("compile", args.config.as_deref(), args.out.as_path(), commands::compile(&cfg, &args.out)?)
        }
    };
    RunManifest::new(name, config, out, &files, start.elapsed()).write(out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tcq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

