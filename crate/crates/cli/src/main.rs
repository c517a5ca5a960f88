//! `spinet`: simulate, check, walk, collapse and synthesize spin networks.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spinet::network::HamiltonianKind;

#[derive(Parser)]
#[command(name = "spinet", version, about = "Quantum state transfer on spin networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Dense,
    Fermion,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Xy,
    Dq,
    Mxy,
}

impl From<Kind> for HamiltonianKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Xy => HamiltonianKind::Xy,
            Kind::Dq => HamiltonianKind::Dq,
            Kind::Mxy => HamiltonianKind::Mxy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample the end-to-end fidelity and report its peak.
    Simulate {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_enum, default_value = "auto")]
        backend: Backend,
        /// Time horizon (default 4π divided by the largest coupling).
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        /// CSV destination for the sampled trace.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perfect-transport conditions of the propagator at one time.
    CheckUnitary {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        time: f64,
    },
    /// Support classification and projector identities of the Hamiltonian.
    CheckHamiltonian {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// Nested-commutator walk operators from the source.
    Walk {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Highest order to compute.
        #[arg(long, default_value_t = 4)]
        orders: usize,
        /// Print only flip-flop edge lists.
        #[arg(long)]
        skeleton_only: bool,
    },
    /// Reduce a network to its effective chain.
    Collapse {
        #[arg(long)]
        network: PathBuf,
        /// Classes as `1;2,4;3,5;6` (default: the partition in the file).
        #[arg(long)]
        partition: Option<String>,
    },
    /// Expand a chain into a weighted network following a branching plan.
    Synth {
        /// Chain couplings `a1,a2,...`.
        #[arg(long)]
        chain: String,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate the bundled figure traces and walk-table comparison.
    Demo {
        #[arg(long, default_value = "demo-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(outcome) => ExitCode::from(outcome as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
