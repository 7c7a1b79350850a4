//! `hbr` — bump detection in heterogeneous Gaussian regression.
//!
//! Subcommands: `simulate` (synthetic data), `detect` (run a test on a CSV),
//! `power` (Monte Carlo level/power grids), `boundary` (detection-boundary
//! constants and the price of adaptation), `tails` (deviation-bound
//! comparison tables) and `condition` (lower-bound condition schedules).
//!
//! Exit codes: 0 success (or accept), 1 reject (`detect` only), 2 error.
//! Every flag can also be supplied through a JSON config file (`--config`);
//! explicit command-line flags win. Data goes to stdout or `--out`;
//! diagnostics go to stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "hbr", version, about = "Bump detection in heterogeneous Gaussian regression")]
struct Cli {
    /// JSON file with default values for the subcommand's flags
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Upper bound on worker threads (or HBR_THREADS); results are identical
    /// for any thread count
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic observations as an `index,value` CSV
    Simulate(commands::SimulateArgs),
    /// Run a test on an observations CSV; exit 0 = accept, 1 = reject
    Detect(commands::DetectArgs),
    /// Monte Carlo power/level surface over a (delta, kappa^2) lattice
    Power(commands::PowerArgs),
    /// Detection-boundary constants, relaxed constants and the r(c) curve
    Boundary(commands::BoundaryArgs),
    /// Compare the deviation bound against the literature, with an MC check
    Tails(commands::TailsArgs),
    /// Evaluate the lower-bound condition along a parameter schedule
    Condition(commands::ConditionArgs),
}

fn init_threads(threads: Option<usize>) {
    let n = threads.or_else(|| {
        std::env::var("HBR_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        // ignore the error if a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args, cli.config.as_deref()),
        Command::Detect(args) => commands::detect(args, cli.config.as_deref()),
        Command::Power(args) => commands::power(args, cli.config.as_deref()),
        Command::Boundary(args) => commands::boundary(args, cli.config.as_deref()),
        Command::Tails(args) => commands::tails(args, cli.config.as_deref()),
        Command::Condition(args) => commands::condition(args, cli.config.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
