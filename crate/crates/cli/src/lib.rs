//! Command-line front end: argument model, validation and dispatch.
//!
//! Exit codes: 0 on success, 1 on invalid input (including argument errors
//! and unwritable outputs), 2 on numerical failure.

use std::ffi::OsString;
use std::path::PathBuf;

use birkhoff_core::birkhoff::BirkhoffError;
use birkhoff_core::complexity::ComplexityError;
use birkhoff_core::grid::{GridError, GridFamily};
use birkhoff_core::kkt::{KktError, DEFAULT_DENSE_CAP};
use birkhoff_core::model::{builtin_problem, ModelError};
use birkhoff_core::solver::SolverError;
use birkhoff_core::spectral::{SpectralError, SPECTRUM_CAP};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod bench;
pub mod commands;
pub mod output;

/// Largest degree accepted by `grid`.
pub const MAX_GRID_DEGREE: usize = 1 << 16;
/// Largest degree for subcommands that build the dense Birkhoff matrices.
pub const MAX_OPERATOR_DEGREE: usize = 4096;
/// Largest degree for dense LU solves and dense benchmarks.
pub const MAX_DENSE_DEGREE: usize = (DEFAULT_DENSE_CAP - 10) / 5;
/// Largest degree for dense eigenvalue reports.
pub const MAX_SPECTRUM_DEGREE: usize = (SPECTRUM_CAP - 10) / 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::NoConvergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownProblem(_) => CliError::Validation(e.to_string()),
            ModelError::NonFinite { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<KktError> for CliError {
    fn from(e: KktError) -> Self {
        match e {
            KktError::Model(m) => m.into(),
            KktError::Birkhoff(BirkhoffError::UnsupportedGrid(_))
            | KktError::DenseCap { .. }
            | KktError::Dimension { .. }
            | KktError::InvalidCounts { .. } => CliError::Validation(e.to_string()),
            KktError::Birkhoff(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidOptions(_) => CliError::Validation(e.to_string()),
            SolverError::Kkt(k) => k.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Grid(g) => g.into(),
            SpectralError::Kkt(k) => k.into(),
            SpectralError::DenseCap { .. } | SpectralError::InvalidInput(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ComplexityError> for CliError {
    fn from(e: ComplexityError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// Matrix Market coordinate format (`assemble` only).
    Mtx,
}

/// Iterate at which the Newton matrix is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum At {
    /// The documented constant initial guess.
    Guess,
    /// The converged Newton solution from that guess.
    Solution,
    /// Uniform entries in [-1, 1] drawn from `--seed`.
    Random,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "birkhoff", version, about = "Birkhoff pseudospectral optimal control toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Built-in problem: tp1, tp2 or tp3.
    #[arg(long, global = true, default_value = "tp1")]
    pub problem: String,
    /// Grid family: cgl (Chebyshev-Gauss-Lobatto) or lgl (Legendre-Gauss-Lobatto).
    #[arg(long, global = true, default_value = "cgl")]
    pub family: String,
    /// Polynomial degree N (N + 1 nodes).
    #[arg(short = 'N', long = "degree", global = true, default_value_t = 16)]
    pub n: usize,
    /// Output format; `assemble` defaults to mtx, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (written atomically); stdout when absent. Relative paths
    /// are resolved against $BIRKHOFF_OUTPUT_DIR when it is set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Use the cosine-transform application of the Birkhoff matrices (cgl only).
    #[arg(long, global = true)]
    pub fast: bool,
    /// Seed for randomized iterates and benchmark inputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Lobatto nodes and quadrature weights.
    Grid,
    /// Birkhoff matrices B^a, B^b and the Birkhoff quadrature weights.
    Basis,
    /// Newton matrix A at an iterate.
    Assemble(AssembleArgs),
    /// Gershgorin discs, eigenvalues and eigenvalue-location checks of A.
    Spectrum(SpectrumArgs),
    /// Damped Newton solve of the discretized optimality system.
    Solve(SolveArgs),
    /// Timings of dense and fast matvecs and of dense LU solves.
    Bench(BenchArgs),
    /// Hamiltonian storage estimate for N_x states, N_u controls, N_n nodes.
    Memory(MemoryArgs),
    /// Space/time complexity table.
    Table1(Table1Args),
}

#[derive(Debug, Clone, Args)]
pub struct AssembleArgs {
    #[arg(long, value_enum, default_value = "solution")]
    pub at: At,
    /// Write the sparsity pattern only (Matrix Market `pattern` field).
    #[arg(long)]
    pub pattern: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long, value_enum, default_value = "solution")]
    pub at: At,
    /// Solve at each listed degree and report spectral radius and Gershgorin
    /// bound instead of a single spectrum.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Solve the Newton systems with restarted GMRES instead of dense LU.
    #[arg(long)]
    pub krylov: bool,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Stopping tolerance on the infinity norm of the residual.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchOp {
    DenseMatvec,
    FastMatvec,
    DenseLu,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Degrees to time; `-N` is ignored.
    #[arg(long, value_delimiter = ',', default_value = "128,256,512")]
    pub ns: Vec<usize>,
    /// Repetitions per point (the median is reported).
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Operations to time; fast-matvec requires the cgl family.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "dense-matvec,fast-matvec,dense-lu")]
    pub ops: Vec<BenchOp>,
}

#[derive(Debug, Clone, Args)]
pub struct MemoryArgs {
    #[arg(long, default_value_t = 1)]
    pub nx: u64,
    #[arg(long, default_value_t = 1)]
    pub nu: u64,
    /// Number of nodes; defaults to N + 1.
    #[arg(long)]
    pub nn: Option<u64>,
    #[arg(long, default_value_t = 8)]
    pub bytes: u64,
}

#[derive(Debug, Clone, Args)]
pub struct Table1Args {
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000,1000000")]
    pub rows: Vec<u64>,
    /// Floating-point operations per second.
    #[arg(long, default_value_t = 1e12)]
    pub flops: f64,
    #[arg(long, default_value_t = 8)]
    pub bytes: u64,
}

/// Parses `birkhoff ...` arguments (the first item is the program name).
pub fn parse_args<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args)
}

impl Cli {
    pub fn grid_family(&self) -> Result<GridFamily, CliError> {
        Ok(self.family.parse::<GridFamily>()?)
    }

    pub fn output_format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            Command::Assemble(_) => Format::Mtx,
            _ => Format::Json,
        })
    }

    /// Checks every flag the subcommand depends on without doing any work.
    pub fn validate(&self) -> Result<(), CliError> {
        let family = self.grid_family()?;
        if self.fast && family != GridFamily::ChebyshevLobatto {
            return Err(CliError::Validation("--fast requires --family cgl".into()));
        }
        if self.output_format() == Format::Mtx && !matches!(self.command, Command::Assemble(_)) {
            return Err(CliError::Validation("--format mtx is only available for assemble".into()));
        }
        let degree = |max: usize| -> Result<(), CliError> {
            if self.n < 2 || self.n > max {
                Err(CliError::Validation(format!("-N must be in 2..={max}, got {}", self.n)))
            } else {
                Ok(())
            }
        };
        let problem = || builtin_problem(&self.problem).map(|_| ()).map_err(CliError::from);
        match &self.command {
            Command::Grid => degree(MAX_GRID_DEGREE),
            Command::Basis => degree(MAX_OPERATOR_DEGREE),
            Command::Assemble(a) => {
                problem()?;
                if a.pattern && self.output_format() != Format::Mtx {
                    return Err(CliError::Validation("--pattern requires --format mtx".into()));
                }
                let max = match (a.at, self.output_format()) {
                    (At::Solution, _) => MAX_DENSE_DEGREE,
                    _ => MAX_OPERATOR_DEGREE,
                };
                degree(max)
            }
            Command::Spectrum(s) => {
                problem()?;
                if s.sweep.is_empty() {
                    return degree(MAX_SPECTRUM_DEGREE);
                }
                for &n in &s.sweep {
                    if !(2..=MAX_DENSE_DEGREE).contains(&n) {
                        return Err(CliError::Validation(format!(
                            "sweep degrees must be in 2..={MAX_DENSE_DEGREE}, got {n}"
                        )));
                    }
                }
                Ok(())
            }
            Command::Solve(s) => {
                problem()?;
                if !(s.tol > 0.0 && s.tol.is_finite()) {
                    return Err(CliError::Validation(format!("--tol must be positive, got {}", s.tol)));
                }
                degree(if s.krylov { MAX_OPERATOR_DEGREE } else { MAX_DENSE_DEGREE })
            }
            Command::Bench(b) => {
                if b.ns.is_empty() || b.ops.is_empty() {
                    return Err(CliError::Validation("bench needs at least one degree and one operation".into()));
                }
                if b.reps < 5 {
                    return Err(CliError::Validation(format!("--reps must be at least 5, got {}", b.reps)));
                }
                if b.ops.contains(&BenchOp::FastMatvec) && family != GridFamily::ChebyshevLobatto {
                    return Err(CliError::Validation("fast-matvec requires --family cgl".into()));
                }
                if b.ops.contains(&BenchOp::DenseLu) {
                    problem()?;
                }
                let max = if b.ops.contains(&BenchOp::DenseLu) {
                    MAX_DENSE_DEGREE
                } else {
                    MAX_OPERATOR_DEGREE
                };
                for &n in &b.ns {
                    if !(2..=max).contains(&n) {
                        return Err(CliError::Validation(format!("bench degrees must be in 2..={max}, got {n}")));
                    }
                }
                Ok(())
            }
            Command::Memory(m) => {
                let nn = m.nn.unwrap_or(self.n as u64 + 1);
                if m.bytes == 0 {
                    return Err(CliError::Validation("--bytes must be at least 1".into()));
                }
                birkhoff_core::complexity::memory_estimate(m.nx, m.nu, nn, m.bytes)?;
                Ok(())
            }
            Command::Table1(t) => {
                if t.rows.is_empty() || t.rows.contains(&0) {
                    return Err(CliError::Validation("--rows must be a non-empty list of positive sizes".into()));
                }
                if !(t.flops > 0.0 && t.flops.is_finite()) || t.bytes == 0 {
                    return Err(CliError::Validation("--flops and --bytes must be positive".into()));
                }
                Ok(())
            }
        }
    }
}

/// Validates `cli`, runs the subcommand and writes its output.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    cli.validate()?;
    commands::dispatch(cli)
}
