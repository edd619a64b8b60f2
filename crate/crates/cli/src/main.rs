//! `barter`: command-line front end for the attention-bartering toolkit.
//!
//! Every subcommand reads one TOML configuration file (`--config`), writes
//! its tables into `--out`, and finishes with a `manifest.toml` recording
//! the effective configuration and a SHA-256 digest of every input file —
//! enough to reproduce the run byte for byte. Exit codes are typed:
//! 0 success, 2 configuration error, 3 numerical failure, 4 bad input data.

use std::path::PathBuf;
use std::process::ExitCode;

use barter_core::error::{Error, Result};
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod manifest;

#[derive(Parser)]
#[command(name = "barter", version, about = "Attention-bartering equilibria, simulation, and network measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration for the subcommand (see configs/ for samples).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory the tables are written into (created if missing).
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,
    /// Override the configured random seed (simulate, synth).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Size of the worker thread pool. Changes speed, never outputs.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the homogeneous club-partition equilibrium and export tables.
    Solve,
    /// Solve the heterogeneous reciprocity-threshold fixed point.
    SolveHet,
    /// Run the agent-based dynamics and compare against the analytic partition.
    Simulate,
    /// Generate a synthetic follow graph and user table from an equilibrium.
    Synth,
    /// Measure a follow graph: ability proxy, percentile series, densities.
    Analyze,
    /// Re-check a stored equilibrium against a grid of deviations.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

/// 2 for configuration/domain mistakes the caller can fix by editing the
/// config, 3 for numerical non-convergence, 4 for unreadable or invalid
/// input files.
fn exit_code(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) | Error::Domain(_) => ExitCode::from(2),
        Error::Numeric(_) => ExitCode::from(3),
        Error::Data(_) | Error::Io { .. } => ExitCode::from(4),
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::config(format!("could not size the thread pool: {e}")))?;
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::config("--config <path> is required; see configs/ for samples"))?;
    let (text, digest) = manifest::read_input("config", path)?;
    let inputs = vec![digest];

    match cli.command {
        Command::Solve => {
            note_seed_ignored(cli, "solve");
            let cfg: config::SolveConfig = config::parse(path, &text)?;
            commands::solve::run(&cfg, &cli.out, &inputs)
        }
        Command::SolveHet => {
            note_seed_ignored(cli, "solve-het");
            let cfg: config::SolveHetConfig = config::parse(path, &text)?;
            commands::solve_het::run(&cfg, &cli.out, &inputs)
        }
        Command::Simulate => {
            let cfg: config::SimulateConfig = config::parse(path, &text)?;
            commands::simulate::run(&cfg, cli.seed, &cli.out, &inputs)
        }
        Command::Synth => {
            let cfg: config::SynthConfig = config::parse(path, &text)?;
            commands::synth::run(&cfg, cli.seed, &cli.out, inputs)
        }
        Command::Analyze => {
            note_seed_ignored(cli, "analyze");
            let cfg: config::AnalyzeConfig = config::parse(path, &text)?;
            commands::analyze::run(&cfg, &cli.out, inputs)
        }
        Command::Verify => {
            note_seed_ignored(cli, "verify");
            let cfg: config::VerifyConfig = config::parse(path, &text)?;
            commands::verify::run(&cfg, &cli.out, inputs)
        }
    }
}

/// The deterministic subcommands accept --seed (it is global) but draw no
/// randomness; say so rather than silently absorbing the flag.
fn note_seed_ignored(cli: &Cli, name: &str) {
    if cli.seed.is_some() {
        eprintln!("note: `{name}` draws no randomness; --seed is ignored");
    }
}
