//! `qsot`: command-line front end for quantum states over spacetime.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or validation
//! error.

mod commands;
mod io;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commands::{Globals, InterfereArgs, SampleArgs, Status, TomoOracle};
use qsot_core::ProductKind;

#[derive(Parser)]
#[command(name = "qsot", version, about = "Quantum states over spacetime: products, interferometry, tomography")]
struct Cli {
    /// Comparison tolerance for verification steps.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Form E ⋆ ρ with the left, right or symmetric product.
    Product {
        #[arg(long, value_parser = parse_kind)]
        kind: ProductKind,
        /// State name (0, 1, +, -, mixed[d], basis[d,k]) or matrix JSON file.
        #[arg(long)]
        state: String,
        /// Channel name (id, X, Y, Z, Y[θ], Z[θ], dephase[θ], depolarize[p]) or channel JSON file.
        #[arg(long)]
        channel: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interference term and outcome probabilities of a two-arm interferometer.
    Interfere {
        /// Dynamics or ensemble JSON file.
        #[arg(long)]
        dynamics: PathBuf,
        /// Unitary on the input region (name or matrix file); identity by default.
        #[arg(long = "V")]
        v: Option<String>,
        /// Unitary on the output region (name or matrix file); identity by default.
        #[arg(long = "W")]
        w: Option<String>,
        /// Probe JSON file; maximum visibility by default.
        #[arg(long)]
        probe: Option<PathBuf>,
        /// Use the time-symmetric (forward/reversed average) pathway.
        #[arg(long)]
        time_reversed: bool,
        /// Number of simulated shots; 0 reports probabilities only.
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled sweep over intervention pairs, as CSV.
    Sample {
        #[arg(long)]
        dynamics: PathBuf,
        /// `paulis` for all 16 qubit Pauli pairs, or a JSON file of [V, W] pairs.
        #[arg(long, default_value = "paulis")]
        pairs: String,
        #[arg(long)]
        probe: Option<PathBuf>,
        #[arg(long)]
        time_reversed: bool,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct a QSOT from Weyl-basis interference terms.
    Tomo {
        /// self:FILE (stored QSOT), dynamics:FILE (exact simulation) or noisy:FILE (finite shots).
        #[arg(long)]
        oracle: TomoOracle,
        /// Region dimensions, e.g. 2,2; read from the oracle by default.
        #[arg(long)]
        dims: Option<String>,
        /// Shots per setting in noisy mode.
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the left product through the compass-qubit protocol.
    Compass {
        #[arg(long)]
        dynamics: PathBuf,
        /// Second ensemble to compare against.
        #[arg(long)]
        against: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Process matrix of a causally ordered dynamics.
    Procmat {
        #[arg(long)]
        dynamics: PathBuf,
        /// Emit the first-order term instead of the process matrix.
        #[arg(long)]
        first_order: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks on probe couplings.
    #[command(subcommand)]
    CamCheck(CamCommand),
    /// Replay every worked example and printed table entry.
    VerifyExamples {
        /// Fixture list JSON to run instead of the built-in one.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Write the built-in fixture list to FILE and exit.
        #[arg(long)]
        dump_fixtures: Option<PathBuf>,
        /// Write a JSON report to FILE.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CamCommand {
    /// Whether H_XR ⊗ 1_Y and H_YR ⊗ 1_X commute.
    Commutator {
        /// Pauli string, swap[d] or matrix file.
        #[arg(long)]
        hxr: String,
        #[arg(long)]
        hyr: String,
        /// dx,dy,dr
        #[arg(long)]
        dims: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether U on X ⊗ R is controlled on the given sectors of R.
    Controlled {
        #[arg(long)]
        unitary: String,
        /// basis:D for rank-1 computational projectors, or a JSON list of matrices.
        #[arg(long)]
        sectors: String,
        #[arg(long)]
        dx: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_kind(s: &str) -> Result<ProductKind, String> {
    s.parse().map_err(|e: qsot_core::Error| e.to_string())
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let g = Globals {
        tolerance: cli.tolerance,
        seed: cli.seed,
    };
    match cli.command {
        Command::Product { kind, state, channel, out } => commands::product(kind, &state, &channel, out.as_deref()),
        Command::Interfere {
            dynamics,
            v,
            w,
            probe,
            time_reversed,
            shots,
            out,
        } => commands::interfere(
            &g,
            InterfereArgs {
                dynamics: &dynamics,
                v: v.as_deref(),
                w: w.as_deref(),
                probe: probe.as_deref(),
                time_reversed,
                shots,
                out: out.as_deref(),
            },
        ),
        Command::Sample {
            dynamics,
            pairs,
            probe,
            time_reversed,
            shots,
            out,
        } => commands::sample_sweep(
            &g,
            SampleArgs {
                dynamics: &dynamics,
                pairs: &pairs,
                probe: probe.as_deref(),
                time_reversed,
                shots,
                out: out.as_deref(),
            },
        ),
        Command::Tomo { oracle, dims, shots, out } => commands::tomo(&g, &oracle, dims.as_deref(), shots, out.as_deref()),
        Command::Compass { dynamics, against, out } => commands::compass(&g, &dynamics, against.as_deref(), out.as_deref()),
        Command::Procmat { dynamics, first_order, out } => commands::procmat(&g, &dynamics, first_order, out.as_deref()),
        Command::CamCheck(CamCommand::Commutator { hxr, hyr, dims, out }) => {
            commands::cam_commutator(&g, &hxr, &hyr, &dims, out.as_deref())
        }
        Command::CamCheck(CamCommand::Controlled { unitary, sectors, dx, out }) => {
            commands::cam_controlled(&unitary, &sectors, dx, out.as_deref())
        }
        Command::VerifyExamples {
            fixtures,
            dump_fixtures,
            report,
        } => commands::verify_examples(&g, fixtures.as_deref(), dump_fixtures.as_deref(), report.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
