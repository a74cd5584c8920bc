//! `ctint`: command-line front end for the complex-time-integration library.
//!
//! Every subcommand writes machine-readable CSV/JSON artifacts plus a
//! `manifest.json` echoing the resolved configuration, and reports through
//! exit codes: 0 success, 1 usage/configuration/I-O error, 2 infeasible or
//! unstable-as-requested, 3 numerical failure (including failed
//! verification).

mod commands;
mod config;
mod manifest;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// A command failure carrying the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config, or input files: exit 1.
    Usage(String),
    /// No feasible answer, or the requested run was unstable: exit 2.
    Infeasible(String),
    /// The numerics themselves failed: exit 3.
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Infeasible(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Infeasible(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<ctint::Error> for Failure {
    fn from(e: ctint::Error) -> Self {
        use ctint::Error::*;
        match e {
            InvalidInput(_) | GridTooLarge { .. } => Failure::Usage(e.to_string()),
            Infeasible(_) | Divergence { .. } => Failure::Infeasible(e.to_string()),
            RootsDidNotConverge { .. } | DegenerateSystem { .. } => {
                Failure::Numerical(e.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ctint",
    version,
    about = "Stability regions, complex Euler paths, step-size optimization, \
             and the benchmark experiments, as reproducible CSV/JSON runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample |Phi| on a window of the complex plane and write a CSV grid
    Region(RegionArgs),
    /// Enumerate all full-order complex Euler paths with n substeps
    Paths(PathsArgs),
    /// Maximize the stable step size over a spectrum read from CSV
    Optimize(OptimizeArgs),
    /// Step-size sweep of the Schroedinger soliton benchmark
    Nls(NlsArgs),
    /// Projective integration of the stiff benchmarks
    Pi(PiArgs),
    /// Run the built-in verification suite and write a JSON report
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct RegionArgs {
    /// Named polynomial preset (fe, rk2, rk3, cfe1, cfe2, cfe3, phi_r,
    /// phi_c, phi_c_minus, rkopt_3s2, copt_3s2)
    #[arg(long)]
    preset: Option<String>,
    /// Inline polynomial coefficients c_0,c_1,... low-to-high; complex
    /// entries like 0.1134-0.06i are allowed
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
    /// Substep weights w_1,...,w_n; the region plotted is that of
    /// prod (1 + w_i z)
    #[arg(long, allow_hyphen_values = true)]
    weights: Option<String>,
    /// Window re_min,re_max,im_min,im_max (default -4,2,-3,3)
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Grid resolution N or NX,NY (default 400)
    #[arg(long)]
    res: Option<String>,
    /// Output directory (default out/region)
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config whose keys override these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
pub struct PathsArgs {
    /// Substep count, 1 through 5
    #[arg(long)]
    n: Option<usize>,
    /// Output directory (default out/paths)
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config whose keys override these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
pub struct OptimizeArgs {
    /// CSV file of eigenvalues, one `re,im` row each
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Stage count = polynomial degree (default 2)
    #[arg(long)]
    stages: Option<usize>,
    /// Enforced order of accuracy (default 1)
    #[arg(long)]
    order: Option<usize>,
    /// Free-coefficient domain: real or complex (default complex)
    #[arg(long)]
    domain: Option<String>,
    /// Relative tolerance of the step-size bisection
    #[arg(long)]
    tol_h: Option<f64>,
    /// Feasibility tolerance on |Phi| - 1
    #[arg(long)]
    tol_feas: Option<f64>,
    /// Recorded in the manifest; the search itself is deterministic
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default out/optimize)
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config whose keys override these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
pub struct NlsArgs {
    /// Comma-separated outer step sizes
    /// (default 0.014,0.007,0.0035,0.002,0.001)
    #[arg(long)]
    dt: Option<String>,
    /// Free coefficient of the two-stage integrator: 1 recovers the real
    /// midpoint-style scheme, 0.5-0.5i the complex one (default 1)
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    /// Wall-time repeats per step size; the median is reported (default 5)
    #[arg(long)]
    repeats: Option<usize>,
    /// Number of spatial modes (default 100)
    #[arg(long)]
    modes: Option<usize>,
    /// Final time (default 6)
    #[arg(long)]
    t_end: Option<f64>,
    /// Output directory (default out/nls)
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config whose keys override these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
pub struct PiArgs {
    /// Benchmark: prothero or oscillator
    #[arg(long)]
    problem: Option<String>,
    /// Inner-step variant: real or complex
    #[arg(long)]
    scheme: Option<String>,
    /// Outer step size (default 0.05 for prothero, 0.1 for oscillator)
    #[arg(long)]
    dt: Option<f64>,
    /// Forcing frequency, prothero only (default 20)
    #[arg(long)]
    xi: Option<f64>,
    /// Final time (default 6 for prothero, 5 for oscillator)
    #[arg(long)]
    t_end: Option<f64>,
    /// Output directory (default out/pi)
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config whose keys override these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Output directory (default out/verify)
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config whose keys override these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Region(args) => commands::region(&args),
        Command::Paths(args) => commands::paths(&args),
        Command::Optimize(args) => commands::optimize(&args),
        Command::Nls(args) => commands::nls(&args),
        Command::Pi(args) => commands::pi(&args),
        Command::Verify(args) => commands::verify(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
