//! Batch front-end: theory tables, scan simulation, and analysis reports
//! driven by a single TOML configuration.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use contextsim_cli::{commands, config::RunConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "contextsim",
    version,
    about = "Simulate and analyze a spin-path contextuality test in neutron interferometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print ideal predictions, noncontextual bounds, and the value-assignment search
    Theory {
        /// Optional config; its custom expressions are evaluated too
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write theory.json / theory.txt into this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the standard scan set and write scans.csv / scans.json
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to run.out_dir from the config)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides run.seed from the config
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides run.repetitions from the config
        #[arg(long)]
        repetitions: Option<u32>,
    },
    /// Reduce a stored scan set to the inequality report and plot data
    Analyze {
        /// Directory containing scans.json
        scans: PathBuf,
        /// Output directory (defaults to the scan directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured stages (theory, simulate, analyze) in one pass
    Full {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repetitions: Option<u32>,
    },
}

fn effective_seed(flag: Option<u64>, config: &RunConfig) -> Result<u64> {
    flag.or(config.run.seed)
        .context("a seed is required: set run.seed in the config or pass --seed")
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Theory { config, out } => {
            let expressions = match config {
                Some(path) => RunConfig::load(&path)?.expressions,
                None => Vec::new(),
            };
            let report = commands::cmd_theory(&expressions, out.as_deref())?;
            print!("{}", commands::theory_text(&report));
        }
        Command::Simulate {
            config,
            out,
            seed,
            repetitions,
        } => {
            let config = RunConfig::load(&config)?;
            let out = out.unwrap_or_else(|| config.run.out_dir.clone());
            let seed = effective_seed(seed, &config)?;
            let repetitions = repetitions.unwrap_or(config.run.repetitions);
            let scans = commands::cmd_simulate(&config, &out, seed, repetitions)?;
            println!(
                "simulated {} scans ({repetitions} repetitions, seed {seed}) into `{}`",
                scans.len(),
                out.display()
            );
        }
        Command::Analyze { scans, out } => {
            let out = out.unwrap_or_else(|| scans.clone());
            let analysis = commands::cmd_analyze(&scans, &out)?;
            print!("{}", analysis.report.text_summary());
        }
        Command::Full {
            config,
            out,
            seed,
            repetitions,
        } => {
            let config = RunConfig::load(&config)?;
            let out = out.unwrap_or_else(|| config.run.out_dir.clone());
            let seed = effective_seed(seed, &config)?;
            let repetitions = repetitions.unwrap_or(config.run.repetitions);
            commands::cmd_full(&config, &out, seed, repetitions)?;
        }
    }
    Ok(())
}
