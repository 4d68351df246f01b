use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use lacuna_cli::config::{self, FileConfig, FlagOverrides};
use lacuna_cli::experiments;
use lacuna_cli::Report;

/// Verification sweeps for the lacunary Walsh phase-plane laboratory.
#[derive(Parser)]
#[command(name = "lacuna", version, about)]
struct Cli {
    /// Grid resolution: cells per unit interval as a power of two.
    #[arg(long, global = true)]
    resolution: Option<u32>,
    /// Frequency sequence: `1,2,4,...` or `pow2:J`.
    #[arg(long, global = true)]
    seq: Option<String>,
    /// Seed for every random draw in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of sampled functions per sweep.
    #[arg(long, global = true)]
    trials: Option<u32>,
    /// Report path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// JSON file with the same keys as the flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform identities: orthonormality, group law, reconstruction.
    Walsh,
    /// Phase-plane geometry and the tile-sum identity.
    Tiles,
    /// Greedy model sum versus the maximal operator.
    ModelSum,
    /// Size cascade, crown repartition, frequency projection.
    Decompose,
    /// Weak-type constants across a p-grid with growth fits.
    WeakLp,
    /// The four-step weak-L1 endpoint chain, spikes included.
    EstimateWw,
    /// Exceptional sets and tail decay on bounded inputs.
    ExpTail,
    /// Banded quasinorm bound over random unit-ball cakes.
    Embedding,
    /// Strong-type constants against p' log_1(p').
    StrongLp,
}

fn run(cli: Cli) -> Result<Report> {
    let file = match &cli.config {
        Some(path) => Some(FileConfig::load(path)?),
        None => None,
    };
    let flags = FlagOverrides {
        resolution: cli.resolution,
        seq: cli.seq.clone(),
        seed: cli.seed,
        trials: cli.trials,
        out: cli.out.clone(),
        format: cli.format.clone(),
    };
    let settings = config::resolve(flags, file)?;
    let report = match cli.command {
        Command::Walsh => experiments::run_walsh(&settings)?,
        Command::Tiles => experiments::run_tiles(&settings)?,
        Command::ModelSum => experiments::run_model_sum(&settings)?,
        Command::Decompose => experiments::run_decompose(&settings)?,
        Command::WeakLp => experiments::run_weak_lp(&settings)?,
        Command::EstimateWw => experiments::run_estimate_ww(&settings)?,
        Command::ExpTail => experiments::run_exp_tail(&settings)?,
        Command::Embedding => experiments::run_embedding(&settings)?,
        Command::StrongLp => experiments::run_strong_lp(&settings)?,
    };
    report.emit(settings.out.as_deref(), settings.format)?;
    if settings.out.is_some() {
        eprintln!("{}", report.status_line());
    }
    Ok(report)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) if report.pass => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
