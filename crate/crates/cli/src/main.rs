//! `rnn-dg-solve`: runs experiment configs and the built-in error tables.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lrnn_dg::error::Error;
use lrnn_dg::harness::{run_to_dir, table_to_dir, ExperimentConfig, RunOptions};

/// Exit status for configuration errors.
const CONFIG_ERROR: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "rnn-dg-solve", version, about = "Local randomized-network DG solvers")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run a single seed instead of the configured list.
    #[arg(long, global = true)]
    seed_override: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a JSON experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also dump the solution on an n x n grid for each (h, M) cell.
        #[arg(long, value_name = "N")]
        dump_grid: Option<usize>,
    },
    /// Regenerate one of the built-in tables (1 to 10).
    Table {
        #[arg(long)]
        which: u8,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(CONFIG_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut opts = RunOptions {
        threads: cli.threads,
        seed_override: cli.seed_override,
        dump_grid: None,
    };
    let outcome = match cli.command {
        Command::Run { config, out, dump_grid } => {
            opts.dump_grid = dump_grid;
            ExperimentConfig::from_path(&config).and_then(|cfg| run_to_dir(&cfg, &opts, &out))
        }
        Command::Table { which, out } => table_to_dir(which, &opts, &out).map(|t| t.rows),
    };
    match outcome {
        Ok(rows) => {
            let failed = rows.iter().filter(|r| r.failed()).count();
            if failed > 0 {
                log::warn!("{failed} of {} cells failed and were flagged", rows.len());
            }
            println!("{} rows written", rows.len());
            ExitCode::SUCCESS
        }
        Err(e @ (Error::Config(_) | Error::Json(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
