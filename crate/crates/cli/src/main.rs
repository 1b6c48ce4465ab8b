//! `cwdiss`: phase diagrams, trajectories, ensembles and moderate-deviation
//! costs for the dissipative Curie–Weiss model.

mod config;
mod error;
mod manifest;
mod mdp;
mod ode;
mod phase;
mod simulate;
mod verify;

use clap::{Parser, Subcommand};
use config::FileConfig;
use error::CliError;
use manifest::OutputDir;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "cwdiss", version, about)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores. Defaults to $CWDISS_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a (kappa, beta) grid and tabulate the critical curves.
    Phase(phase::PhaseArgs),
    /// Integrate the limiting dynamics and locate limit cycles.
    Ode(ode::OdeArgs),
    /// Simulate finite-n replicas of the jump process.
    Simulate(simulate::SimulateArgs),
    /// Path costs, Lagrangian tables and exit-probability estimates.
    Mdp(mdp::MdpArgs),
    /// Run the built-in invariant suite.
    Verify,
}

/// Settings shared by every command.
pub struct Context {
    pub file: FileConfig,
    pub out: PathBuf,
    pub threads: usize,
}

impl Context {
    pub fn outputs(&self) -> Result<OutputDir, CliError> {
        OutputDir::create(&self.out)
    }

    /// Runs `job` on a pool capped at `self.threads` workers.
    pub fn in_pool<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T, CliError> {
        if self.threads == 0 {
            return Ok(job());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| CliError::config(format!("cannot start {} worker threads: {e}", self.threads)))?;
        Ok(pool.install(job))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = config::load(cli.config.as_deref())?;
    let threads = config::threads(cli.threads, file.run.threads)?;
    let out = cli.out.or_else(|| file.run.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context { file, out, threads };
    match cli.command {
        Command::Phase(args) => phase::run(&ctx, &args),
        Command::Ode(args) => ode::run(&ctx, &args),
        Command::Simulate(args) => simulate::run(&ctx, &args),
        Command::Mdp(args) => mdp::run(&ctx, &args),
        Command::Verify => verify::run(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cwdiss: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
