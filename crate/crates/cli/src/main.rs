mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Loop expectation values of the open quantum symmetric simple exclusion process.
#[derive(Parser, Debug)]
#[command(name = "qssep", version, about)]
struct Cli {
    /// Worker threads for parallel sweeps and simulations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(untagged)]
enum Command {
    /// Exact loop polynomial of a single cycle.
    LoopEval(commands::LoopEvalArgs),
    /// Sweep the local identities over every single cycle up to a size.
    Verify(commands::VerifyArgs),
    /// Generating-series pipeline for a deformation profile.
    Series(commands::SeriesArgs),
    /// Monte Carlo simulation of the noisy chain against the analytic cumulants.
    Simulate(commands::SimulateArgs),
    /// Face polynomial of the associahedron from the regular loop.
    Associahedron(commands::AssociahedronArgs),
    /// Reconcile solver, series and verifier (and optionally simulation) on one cycle.
    Compare(commands::CompareArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::LoopEval(_) => "loop-eval",
            Command::Verify(_) => "verify",
            Command::Series(_) => "series",
            Command::Simulate(_) => "simulate",
            Command::Associahedron(_) => "associahedron",
            Command::Compare(_) => "compare",
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct OutputArgs {
    /// Emit one JSON document instead of text.
    #[arg(long)]
    pub json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    let ctx = manifest::Context::new(cli.command.name(), &cli.command, cli.threads);
    let outcome = match &cli.command {
        Command::LoopEval(a) => commands::loop_eval(a, ctx),
        Command::Verify(a) => commands::verify(a, ctx),
        Command::Series(a) => commands::series(a, ctx),
        Command::Simulate(a) => commands::simulate(a, ctx),
        Command::Associahedron(a) => commands::associahedron(a, ctx),
        Command::Compare(a) => commands::compare(a, ctx),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let code = commands::exit_code(&e);
            if code == 3 {
                eprintln!("internal error: {e:#}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(code)
        }
    }
}
