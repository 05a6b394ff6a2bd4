use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nichesel::cli::{self, Overrides};

#[derive(Parser)]
#[command(
    name = "nichesel",
    about = "Niching genetic algorithms for wrapper-style variable selection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every configured (algorithm, seed) run and write reports.
    Run {
        /// Experiment config (TOML).
        config: PathBuf,
        #[command(flatten)]
        overrides: CommonArgs,
    },
    /// Run all configured algorithms on the identical dataset and emit the
    /// comparison tables.
    Compare {
        config: PathBuf,
        #[command(flatten)]
        overrides: CommonArgs,
    },
    /// Escalate population/generations along the configured ladder and
    /// report the approach to the crowding point.
    CrowdingStudy {
        config: PathBuf,
        #[command(flatten)]
        overrides: CommonArgs,
    },
    /// Generate a synthetic dataset from a spec file and export it as CSV.
    Synth {
        /// Synthetic spec (TOML).
        spec: PathBuf,
        /// Output directory.
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread count (default: NICHESEL_WORKERS or all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Replace the configured seed list with a single seed.
    #[arg(long)]
    seed_override: Option<u64>,
}

impl From<CommonArgs> for Overrides {
    fn from(args: CommonArgs) -> Self {
        Overrides {
            out: args.out,
            workers: args.workers,
            seed_override: args.seed_override,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, overrides } => cli::cmd_run(&config, &overrides.into()),
        Command::Compare { config, overrides } => cli::cmd_compare(&config, &overrides.into()),
        Command::CrowdingStudy { config, overrides } => {
            cli::cmd_crowding_study(&config, &overrides.into())
        }
        Command::Synth { spec, out } => cli::cmd_synth(&spec, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
