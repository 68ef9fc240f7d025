//! `szego`: sum-rule reports, transfer matrices, gauge conversion, j-moduli
//! and unitary-node demos from the command line.

// negated comparisons are deliberate: they reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod parse;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "szego", version, about = "Canonical systems in the Arov gauge: sum rules, transfer matrices, gauges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropy of the Schur function against the coefficient integral.
    Sumrule(SumruleArgs),
    /// Transfer matrix 𝔄(z, T) with structural diagnostics.
    Transfer(TransferArgs),
    /// Convert between the Arov gauge and the Potapov–de Branges gauge.
    Gauge(GaugeArgs),
    /// j-modulus and polar factors of a 2×2 j-contractive matrix.
    Jmod(JmodArgs),
    /// Random isometry through the Arov–Grossman, Redheffer and
    /// Potapov–Ginzburg pipeline.
    NodesDemo(NodesArgs),
}

/// Options shared by every command that integrates a profile.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output directory; nothing is written to disk without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, default_value = "csv,json")]
    pub formats: String,
    /// Base integration step.
    #[arg(long = "ode-step", default_value_t = 1e-3)]
    pub ode_step: f64,
}

#[derive(Args, Debug)]
pub struct SumruleArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// Initial entropy nodes; a power of two ≥ 64.
    #[arg(long, default_value_t = 2048)]
    pub nodes: usize,
    /// Absolute tolerance on |entropy − rhs|.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Relative tolerance on |entropy − rhs| / rhs.
    #[arg(long = "rel-tol", default_value_t = 1e-2)]
    pub rel_tol: f64,
    /// Cap on the Möbius-limit length in the Schur evaluation.
    #[arg(long = "t-cap", default_value_t = 1e4)]
    pub t_cap: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct TransferArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// Spectral parameter, e.g. `0.5+1i`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    #[arg(long = "T")]
    pub t_end: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Arov2pdb,
    Pdb2arov,
}

#[derive(Args, Debug)]
pub struct GaugeArgs {
    #[arg(long, value_enum)]
    pub direction: Direction,
    /// Profile JSON for arov2pdb, Hamiltonian CSV for pdb2arov.
    #[arg(long)]
    pub profile: PathBuf,
    /// Sampling length for arov2pdb; defaults to the profile's T0.
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// Bound on the round-trip residual.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct JmodArgs {
    /// `m11,m12;m21,m22` with complex entries.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: String,
    /// Factor a j-expanding matrix through its j-contractive inverse.
    #[arg(long)]
    pub expanding: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct NodesArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `dim K,dim E`.
    #[arg(long, default_value = "2,1")]
    pub dims: String,
    /// Random parameters ℰ per evaluation point.
    #[arg(long, default_value_t = 5)]
    pub params: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<commands::Report> {
    match cli.command {
        Command::Sumrule(a) => commands::sumrule(&a),
        Command::Transfer(a) => commands::transfer(&a),
        Command::Gauge(a) => commands::gauge(&a),
        Command::Jmod(a) => commands::jmod(&a),
        Command::NodesDemo(a) => commands::nodes_demo(&a),
    }
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
    let failure = match run(cli) {
        Ok(report) => {
            // a report is printed even when its checks fail
            println!("{}", report.json);
            report.failure.map(CliError::Verification)
        }
        Err(e) => Some(e),
    };
    match failure {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("szego: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
