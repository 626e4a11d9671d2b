//! `outerlp`: experiment runner for iterated outer `L^p` quasi-norms.
//!
//! Subcommands compute norms on described or explicit spaces, tabulate the
//! two extremal families against their closed forms, and run seeded property
//! suites (collapse ratios, duality envelopes, quasi-triangle bounds,
//! decomposition replays, structured dyadic geometry).
//!
//! Exit codes: `0` all checks passed, `1` a verified property failed (the
//! emitted report carries the witness), `2` malformed input or configuration.

mod counterexample;
mod norm;
mod output;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "outerlp", version, about = "Iterated outer Lp norm experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a single or double iterated quasi-norm with its step profile.
    Norm(norm::NormArgs),
    /// Tabulate an extremal family against its closed-form references.
    Counterexample(counterexample::CounterexampleArgs),
    /// Run a seeded property suite and emit its envelope table.
    #[command(subcommand)]
    Verify(verify::Suite),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Norm(args) => norm::run(args),
        Command::Counterexample(args) => counterexample::run(args),
        Command::Verify(suite) => verify::run(suite),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
