use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod exit;
mod output;

use config::FileConfig;

#[derive(Parser, Debug)]
#[command(
    name = "frogtree",
    version,
    about = "Frog model simulations, couplings and bounds on d-ary trees"
)]
struct Cli {
    /// Configuration file of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true, env = "FROGTREE_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Threshold rho* from the P(A) product bound, and q*.
    Bounds(commands::bounds::Args),
    /// Moment recursion table.
    Moments(commands::moments::Args),
    /// Independent trials of FM, FM′ or RFM.
    Simulate(commands::simulate::Args),
    /// Coupled trials with invariant checks.
    Couple(commands::couple::Args),
    /// Root-visit means over a grid of drifts and depth caps.
    Sweep(commands::sweep::Args),
    /// Samples of V_t, simulated or from the recursion surrogate.
    Vt(commands::vt::Args),
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let mut file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Bounds(a) => commands::bounds::run(a, &mut file),
        Command::Moments(a) => commands::moments::run(a, &mut file),
        Command::Simulate(a) => commands::simulate::run(a, &mut file),
        Command::Couple(a) => commands::couple::run(a, &mut file),
        Command::Sweep(a) => commands::sweep::run(a, &mut file),
        Command::Vt(a) => commands::vt::run(a, &mut file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code_for(&err))
        }
    }
}
