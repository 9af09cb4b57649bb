//! `flsnn` experiment runner.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 1 on runtime errors.
//! Log verbosity follows `RUST_LOG` (e.g. `RUST_LOG=info`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use flsnn::experiment::{generate_data, run_baseline, run_experiment, sweep, RunConfig, SweepKey};

#[derive(Debug, Parser)]
#[command(
    name = "flsnn",
    version,
    about = "Federated training of GLM spiking neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train with the configured schedule and write metrics.csv and summary.csv.
    Run { config: PathBuf },
    /// Run one experiment per value of tau or rate.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        key: SweepKey,
        /// Comma-separated values, e.g. 5,50,400 or 1/8,1/4.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Write the synthetic dataset as SRAS raster files.
    GenData { config: PathBuf },
    /// Train every device separately, without synchronization.
    Baseline { config: PathBuf },
}

fn run(cli: Cli) -> flsnn::Result<()> {
    match cli.command {
        Command::Run { config } => {
            let config = RunConfig::load(config)?;
            let s = run_experiment(&config)?;
            println!(
                "mean accuracy {:.4}, mean log-loss {:.4}{}",
                s.mean_accuracy,
                s.mean_log_loss,
                s.mean_loss_ratio
                    .map(|r| format!(", loss ratio {r:.4}"))
                    .unwrap_or_default()
            );
        }
        Command::Sweep {
            config,
            key,
            values,
        } => {
            let config = RunConfig::load(config)?;
            for row in sweep(&config, key, &values)? {
                println!(
                    "{}={}: mean accuracy {:.4}, uploaded {}",
                    key.name(),
                    row.value,
                    row.summary.mean_accuracy,
                    row.summary.comm.total_uploaded()
                );
            }
        }
        Command::GenData { config } => {
            let config = RunConfig::load(config)?;
            for p in generate_data(&config)? {
                println!("{}", p.display());
            }
        }
        Command::Baseline { config } => {
            let config = RunConfig::load(config)?;
            let s = run_baseline(&config)?;
            println!(
                "mean accuracy {:.4}, mean log-loss {:.4}",
                s.mean_accuracy, s.mean_log_loss
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
