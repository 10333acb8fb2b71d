//! `dynmap`: divisibility sweeps over preset families of dynamical maps.
//!
//! Exit status is 0 for a clean run, 2 when a divisibility violation is found and
//! 1 on any error. `DYNMAP_THREADS` caps the worker pool.

// `!(a < b)` is deliberate: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;
mod presets;

use config::{RunArgs, RunConfig};
use output::Status;

#[derive(Parser)]
#[command(name = "dynmap", version, about = "Divisibility tests for families of quantum dynamical maps")]
struct Cli {
    /// Print the preset families and exit.
    #[arg(long)]
    list_presets: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Trace-norm witness scan for P-divisibility.
    ScanP(RunArgs),
    /// Ancilla-extended witness scan for CP-divisibility.
    ScanCp(RunArgs),
    /// Divisor regimes of an idempotent family.
    Idempotent(RunArgs),
    /// Witness growth and verdicts for the Schur-multiplier family.
    Schur(RunArgs),
    /// Determinant criterion for Gaussian families.
    Gaussian(RunArgs),
    /// The map taking time s to time t, or kernel inclusion when s is singular.
    Intermediate(RunArgs),
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("DYNMAP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().with_context(|| format!("DYNMAP_THREADS={raw:?} is not a count"))?;
    if n == 0 {
        anyhow::bail!("DYNMAP_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting the thread pool")?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    if cli.list_presets {
        print!("{}", presets::list());
        return Ok(ExitCode::SUCCESS);
    }
    let Some(command) = cli.command else {
        anyhow::bail!("no command given; see --help");
    };
    let (args, run): (&RunArgs, fn(&RunConfig) -> Result<output::Outcome>) = match &command {
        Command::ScanP(a) => (a, |c| commands::scan(c, false)),
        Command::ScanCp(a) => (a, |c| commands::scan(c, true)),
        Command::Idempotent(a) => (a, commands::idempotent),
        Command::Schur(a) => (a, commands::schur),
        Command::Gaussian(a) => (a, commands::gaussian),
        Command::Intermediate(a) => (a, commands::intermediate),
    };
    let cfg = RunConfig::resolve(args)?;
    let outcome = run(&cfg)?;
    output::emit(&outcome, cfg.out.as_deref())?;
    Ok(match &outcome.status {
        Status::Clean => ExitCode::SUCCESS,
        Status::Violation => ExitCode::from(2),
        Status::Failed(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors exit 1; 2 is reserved for violations.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
