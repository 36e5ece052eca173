//! `bornrate`: simulate detection logs, analyze their convergence to the
//! Born cdf, sweep over bins and detector efficiency, and merge reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;

use config::{Overrides, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "bornrate", version, about = "Born-rule convergence-rate harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a detection log and write `<out>/events.csv`
    Simulate {
        #[command(flatten)]
        opts: Overrides,
    },
    /// Compute the deviation series and rate fit of a log: `<out>/series.csv`, `<out>/fit.json`
    Analyze {
        /// Event log written by `simulate`
        log: Option<PathBuf>,
        /// Fit a precomputed `N,D` series instead of a log
        #[arg(long, conflicts_with = "log")]
        series_in: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Full-factorial sweep over bins and efficiency: `<out>/sweep.csv`
    Sweep {
        #[command(flatten)]
        opts: Overrides,
    },
    /// Merge fit.json files (or earlier reports) into `<out>/report.csv`
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { opts } => commands::simulate(&RunConfig::load(&opts)?),
        Command::Analyze {
            log,
            series_in,
            opts,
        } => commands::analyze(&RunConfig::load(&opts)?, log.as_deref(), series_in.as_deref()),
        Command::Sweep { opts } => commands::sweep(&RunConfig::load(&opts)?),
        Command::Report { inputs, out } => commands::report(&inputs, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.tag());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
