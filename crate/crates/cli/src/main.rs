mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dyadic_nets::nets::NetSource;
use dyadic_nets::norms::QGrid;
use dyadic_nets::Error;

/// Binary digital nets, their duals, and discrepancy norm experiments.
#[derive(Debug, Parser)]
#[command(name = "dyadnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the points of a (shifted, optionally rescaled) net.
    Gen(Common),
    /// Report deficiency, dual RT weight and the box-count check.
    Certify(Common),
    /// Run the exact identity suite.
    Verify(VerifyArgs),
    /// Estimate L^q norms of the discrepancy and its Walsh approximation.
    Norms(Common),
    /// Norm growth across a range of resolutions with random shifts.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// van-der-corput, sobol, or file:PATH
    #[arg(long, default_value = "van-der-corput")]
    pub net: NetSource,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub s: Option<u32>,
    /// Rescale to N points (gen only); s defaults to ceil(log2 N)
    #[arg(long)]
    pub count: Option<usize>,
    /// Apply a random digit shift drawn from this seed
    #[arg(long)]
    pub shift_seed: Option<u64>,
    #[arg(long)]
    pub shifts: Option<usize>,
    /// Comma-separated exponents, e.g. 2,4,8
    #[arg(long)]
    pub q_grid: Option<QGrid>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exact rational output where available
    #[arg(long)]
    pub exact: bool,
    /// Orlicz exponent; defaults to (n+1)/2
    #[arg(long)]
    pub theta: Option<f64>,
    /// Worker threads (0 = all cores); never changes results
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stratify Monte Carlo samples over dyadic cells
    #[arg(long)]
    pub stratified: bool,
    /// log2 of the largest subspace enumerated exhaustively
    #[arg(long, default_value_t = dyadic_nets::f2::DEFAULT_ENUMERATION_CAP_LOG2)]
    pub cap: u32,
    /// Allow s > 10 or n > 4
    #[arg(long)]
    pub large: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Negative control: perturb the dual basis before the Poisson check
    #[arg(long)]
    pub corrupt_dual: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 4)]
    pub s_min: u32,
    #[arg(long, default_value_t = 10)]
    pub s_max: u32,
    /// Skip the joint (Y, T) estimate of the approximation
    #[arg(long)]
    pub no_approximation: bool,
}

/// Errors from a command, with their exit codes.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Runtime(String),
    Identity(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Input(_) => 2,
            Failure::Identity(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch { .. }
            | Error::InvalidParameter(_)
            | Error::OutOfRange(_)
            | Error::AmbientTooLarge(_)
            | Error::NotInjective { .. }
            | Error::Parse { .. }
            | Error::UnknownNet(_)
            | Error::NotPowerOfTwo { .. }
            | Error::RescaleFailure { .. }
            | Error::ZeroSamples
            | Error::Io(_) => Failure::Input(e.to_string()),
            Error::IdentityViolation(_) => Failure::Identity(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Runtime(m) => write!(f, "error: {m}"),
            Failure::Identity(m) => write!(f, "identity failure: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(c) => commands::gen(&c),
        Command::Certify(c) => commands::certify(&c),
        Command::Verify(v) => commands::verify(&v),
        Command::Norms(c) => commands::norms(&c),
        Command::Sweep(s) => commands::sweep(&s),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dyadnet: {f}");
            ExitCode::from(f.code())
        }
    }
}
