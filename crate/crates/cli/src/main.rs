//! `edgeflow`: experiment runner for the cone-flow numerical laboratory.
//!
//! Subcommands: `stability`, `indicial`, `kernel`, `flow`, `appendix`.
//! Exit codes: 0 ok, 2 validation failure, 3 nonconvergence, 4 tolerance
//! failure.

mod commands {
    pub mod appendix;
    pub mod flow;
    pub mod indicial;
    pub mod kernel;
    pub mod stability;
}
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use config::Config;
use edgeflow_core::EdgeflowError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "edgeflow",
    version,
    about = "Cone heat kernels, stability audits, indicial exponents, and Ricci-de Turck flow diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (line-oriented key=value text).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports and trajectories.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized audits; recorded in every report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Tangential / weak tangential stability audits of spectrum tables.
    Stability(CommonArgs),
    /// Index-set elements, minimal exponents, Holder windows.
    Indicial(CommonArgs),
    /// Mode heat kernel property suites and table export.
    Kernel(CommonArgs),
    /// Picard iteration of the linearized flow with diagnostics.
    Flow(CommonArgs),
    /// Mean-value and Holder-quotient audits.
    Appendix(CommonArgs),
}

fn dispatch(cmd: &Command) -> edgeflow_core::Result<i32> {
    let (args, run): (&CommonArgs, fn(&Config, &std::path::Path, u64) -> _) = match cmd {
        Command::Stability(a) => (a, commands::stability::run),
        Command::Indicial(a) => (a, commands::indicial::run),
        Command::Kernel(a) => (a, commands::kernel::run),
        Command::Flow(a) => (a, commands::flow::run),
        Command::Appendix(a) => (a, commands::appendix::run),
    };
    let config = Config::load(&args.config)?;
    std::fs::create_dir_all(&args.out)?;
    run(&config, &args.out, args.seed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("edgeflow: {e}");
            let code = match e {
                EdgeflowError::Domain(_)
                | EdgeflowError::Parse { .. }
                | EdgeflowError::Validation(_)
                | EdgeflowError::Io(_) => 2,
                EdgeflowError::Numeric(_)
                | EdgeflowError::Fit(_)
                | EdgeflowError::Quadrature { .. }
                | EdgeflowError::Basis(_)
                | EdgeflowError::State(_)
                | EdgeflowError::LinearAlgebra { .. } => 2,
            };
            ExitCode::from(code)
        }
    }
}
