use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;

/// Generate, solve, verify and probe complex plank instances.
#[derive(Debug, Parser)]
#[command(name = "plank", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an instance JSON file.
    Generate(GenerateArgs),
    /// Find a unit vector clearing every plank.
    Solve(SolveArgs),
    /// Check a solution against an instance.
    Verify(VerifyArgs),
    /// Evaluate the escape-step diagnostics at a given vector.
    Diag(DiagArgs),
    /// Brute-force maximizer for cross-checking.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenMode {
    Equal,
    Random,
    Tight,
    Repeated,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub d: usize,
    /// Number of planks (ignored by `tight`).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub mode: GenMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SolveArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub multistart: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub margin_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Worker threads for the multistart (0 = one per core).
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Solution JSON (a solve result, or a bare `[[re, im], ...]` vector).
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value_t = 1e-7)]
    pub tol_margin: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagWhat {
    Pprime,
    Probe,
    Circle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    /// Holomorphic for equal weights, weighted otherwise.
    Auto,
    Holomorphic,
    Weighted,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct DiagArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Vector JSON (a solve result, or a bare `[[re, im], ...]` vector).
    #[arg(long)]
    pub u: PathBuf,
    /// Plank index, 1-based.
    #[arg(long)]
    pub j: usize,
    #[arg(long, value_enum)]
    pub what: DiagWhat,
    #[arg(long, value_enum, default_value_t = VariantArg::Auto)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 512)]
    pub boundary_samples: usize,
    #[arg(long, default_value_t = 2000)]
    pub interior_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, serde::Serialize)]
#[command(group(ArgGroup::new("budget").required(true).args(["grid", "samples"])))]
pub struct OracleArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Grid resolution for the d = 2 brute force.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Number of random restarts.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => commands::generate(&args),
        Command::Solve(args) => commands::solve(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Diag(args) => commands::diag(&args),
        Command::Oracle(args) => commands::oracle(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code)
        }
    }
}
