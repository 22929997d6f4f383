use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use wasn_deploy_cli::export::export;
use wasn_deploy_cli::sweep::{aggregate, read_summary, write_tradeoff_csv, SweepOutcome};
use wasn_deploy_cli::{run, ExperimentConfig, RunOptions};

/// Exit status of `sweep-summary` when the summary holds no runs.
const EMPTY_STATUS: u8 = 3;

#[derive(Parser)]
#[command(name = "wasn-deploy", version, about = "Sensor and fusion-center placement with multi-hop routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm, lambda and seed listed in a JSON config.
    Run {
        config: PathBuf,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Write into a non-empty output directory.
        #[arg(long)]
        force: bool,
    },
    /// Aggregate a summary.csv per algorithm and lambda; CSV on stdout.
    SweepSummary { summary: PathBuf },
    /// Write nodes, flows and partition CSVs for a final_state.json.
    Export { state: PathBuf, prefix: PathBuf },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run { config, jobs, force } => {
            let cfg = ExperimentConfig::load(&config)?;
            let base = config.parent().unwrap_or(Path::new("."));
            let report = run(&cfg, base, &RunOptions { jobs, force })?;
            eprintln!("{} runs written to {}", report.rows.len(), report.output_dir.display());
        }
        Command::SweepSummary { summary } => match aggregate(&read_summary(&summary)?) {
            SweepOutcome::Empty => {
                eprintln!("{}: no runs to aggregate", summary.display());
                return Ok(ExitCode::from(EMPTY_STATUS));
            }
            SweepOutcome::Table(table) => write_tradeoff_csv(io::stdout().lock(), &table)?,
        },
        Command::Export { state, prefix } => {
            let paths = export(&state, &prefix)?;
            for p in [paths.nodes, paths.flows, paths.partition] {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
