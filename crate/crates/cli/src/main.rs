use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coordwalk_cli::output::write_atomic;
use coordwalk_cli::{run_to_bytes, CliError, Command, ExperimentConfig, Format, Resolved};

/// Coordinate hit-and-run experiments.
#[derive(Debug, Parser)]
#[command(name = "coordwalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Record a chain trajectory.
    Sample(Common),
    /// Estimate the conductance of a halfspace cut.
    Conductance(Common),
    /// Search for the worst axis-disjoint isoperimetric ratio on a cube grid.
    Iso(Common),
    /// Sweep prism lengths and fit conductance slopes.
    Lowerbound(Common),
    /// Total variation to uniform against the step count.
    Mixcurve(Common),
    /// Time cached against recomputed residuals.
    Bench(Common),
    /// Exact spectral gap and cut conductance of the grid chain.
    Discrete(Common),
}

#[derive(Debug, clap::Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(command: Command, args: Common) -> Result<(), CliError> {
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::config("threads", e.to_string()))?;
    }
    let (config, text) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            (ExperimentConfig::from_toml(&text)?, text)
        }
        None => (ExperimentConfig::default(), String::new()),
    };
    let resolved =
        Resolved::new(command, config, args.seed, args.format, args.out).map_err(|e| e.locate_in(&text))?;
    let bytes = run_to_bytes(&resolved)?;
    match &resolved.out {
        Some(path) => write_atomic(path, &bytes),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Sample(a) => (Command::Sample, a),
        Sub::Conductance(a) => (Command::Conductance, a),
        Sub::Iso(a) => (Command::Iso, a),
        Sub::Lowerbound(a) => (Command::Lowerbound, a),
        Sub::Mixcurve(a) => (Command::Mixcurve, a),
        Sub::Bench(a) => (Command::Bench, a),
        Sub::Discrete(a) => (Command::Discrete, a),
    };
    match run(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
