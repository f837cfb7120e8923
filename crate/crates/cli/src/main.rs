//! `neumann`: command-line front end.
//!
//! Subcommands: `classify`, `invariants`, `spectral`, `simulate`, `verify`.
//! Each reads a JSON run configuration, emits a JSON report (stdout or
//! `--out`) and exits with 0 on success, 2 on configuration errors, 3 on
//! constraint violations, 4 on a spectral factorization mismatch, 5 when
//! drift exceeds tolerance, and 1 otherwise.

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use config::{positive, NumbersMode};
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Constraint(String),
    Factorization(String),
    Drift(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Constraint(_) => 3,
            CliError::Factorization(_) => 4,
            CliError::Drift(_) => 5,
            CliError::Other(_) => 1,
        }
    }

    pub fn from_core(e: neumann_core::Error) -> Self {
        match e {
            neumann_core::Error::ConstraintViolation { .. } => CliError::Constraint(e.to_string()),
            neumann_core::Error::FactorizationMismatch { .. } => {
                CliError::Factorization(e.to_string())
            }
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m)
            | CliError::Constraint(m)
            | CliError::Factorization(m)
            | CliError::Drift(m)
            | CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "neumann",
    version,
    about = "Constrained dynamics and exact spectral invariants of the Neumann system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Superintegrability classification from the multiplicity pattern
    Classify(CommonArgs),
    /// First integrals, momentum blocks and the energy identity
    Invariants(CommonArgs),
    /// Characteristic polynomial, curve components and genus report
    Spectral(CommonArgs),
    /// Integrate the flow; emit a trajectory CSV and a drift report
    Simulate(SimulateArgs),
    /// Run the full property suite on the configured state
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output path for the JSON report (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured numbers mode
    #[arg(long, value_enum)]
    mode: Option<NumbersMode>,
    /// Override the integrator end time
    #[arg(long)]
    t_final: Option<f64>,
    /// Override the integrator step size
    #[arg(long)]
    dt: Option<f64>,
    /// Override the sample stride
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write the trajectory CSV to this path
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, csv) = match &cli.command {
        Command::Classify(c)
        | Command::Invariants(c)
        | Command::Spectral(c)
        | Command::Verify(c) => (c, None),
        Command::Simulate(s) => (&s.common, s.csv.clone()),
    };

    let mut cfg = config::load_config(&common.config)?;
    if let Some(mode) = common.mode {
        cfg.numbers_mode = mode;
    }
    if let Some(t) = common.t_final {
        cfg.t_final = t;
    }
    if let Some(h) = common.dt {
        cfg.h = h;
    }
    if let Some(s) = common.stride {
        cfg.stride = s;
    }
    if !positive(cfg.t_final) || !positive(cfg.h) || cfg.stride == 0 {
        return Err(CliError::Config(
            "integrator overrides must be positive".into(),
        ));
    }

    let output = match &cli.command {
        Command::Classify(_) => commands::classify(&cfg)?,
        Command::Invariants(_) => commands::invariants(&cfg)?,
        Command::Spectral(_) => commands::spectral_curve(&cfg)?,
        Command::Simulate(_) => commands::simulate(&cfg, csv.as_deref())?,
        Command::Verify(_) => commands::verify(&cfg)?,
    };

    match &common.out {
        Some(path) => std::fs::write(path, format!("{}\n", output.json))
            .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{}", output.json),
    }

    match output.post {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
