//! Subcommand implementations and their output records.

use birkhoff_core::birkhoff::BirkhoffOperators;
use birkhoff_core::complexity::{hamiltonian_storage, memory_estimate, table1_row};
use birkhoff_core::grid::{make_grid, GridFamily, GridSpec};
use birkhoff_core::kkt::{assemble, DecisionVector, HamiltonianDiagonals, Layout, NnzReport};
use birkhoff_core::model::{builtin_problem, OcpProblem};
use birkhoff_core::solver::{initial_guess, newton_solve, LinearPath, SolveReport, SolverOptions};
use birkhoff_core::spectral::{
    column_sum_report, spectral_radius_sweep, verify_theorem1, ColumnSumReport, SpectrumReport, SweepRow,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bench::{run_bench, BenchConfig};
use crate::output::{emit, to_csv, to_json};
use crate::{At, Cli, CliError, Command, Format};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutput {
    pub family: GridFamily,
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRow {
    pub index: usize,
    pub node: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisOutput {
    pub family: GridFamily,
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major.
    pub ba: Vec<Vec<f64>>,
    pub bb: Vec<Vec<f64>>,
    /// `[B^a, B^b]`.
    pub max_row_abs_sums: [f64; 2],
    pub max_column_abs_sums: [f64; 2],
    pub lemma1_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub matrix: String,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Zero-based structural entry of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembleOutput {
    pub problem: String,
    pub family: GridFamily,
    pub degree: usize,
    pub at: At,
    pub dim: usize,
    pub nnz: NnzReport,
    pub hamiltonian_diagonals: HamiltonianDiagonals,
    pub endpoint_block: [[f64; 5]; 5],
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOutput {
    pub problem: String,
    pub family: GridFamily,
    pub degree: usize,
    pub at: At,
    pub report: SpectrumReport,
    pub column_sums: ColumnSumReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub problem: String,
    pub family: GridFamily,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub index: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub index: usize,
    pub tau: f64,
    pub x: f64,
    pub u: f64,
    pub lambda: f64,
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryOutput {
    pub nx: u64,
    pub nu: u64,
    pub nn: u64,
    pub bytes_per_value: u64,
    pub values: u64,
    pub bytes: u64,
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let format = cli.output_format();
    let bytes = match &cli.command {
        Command::Grid => grid(cli, format)?,
        Command::Basis => basis(cli, format)?,
        Command::Assemble(a) => assemble_cmd(cli, format, a.at, a.pattern)?,
        Command::Spectrum(s) if s.sweep.is_empty() => spectrum(cli, format, s.at)?,
        Command::Spectrum(s) => sweep(cli, format, &s.sweep)?,
        Command::Solve(s) => {
            let opts = SolverOptions {
                max_iter: s.max_iter,
                tol: s.tol,
                linear_path: if s.krylov {
                    LinearPath::StructuredKrylov
                } else {
                    LinearPath::DenseLu
                },
                fast_matvec: cli.fast,
                ..SolverOptions::default()
            };
            let report = solve(cli, &opts)?;
            let bytes = match format {
                Format::Csv => to_csv(trajectory_rows(&report))?,
                _ => to_json(&report)?,
            };
            emit(cli.out.as_deref(), &bytes)?;
            if !report.converged {
                return Err(CliError::Numerical(format!(
                    "Newton stopped ({:?}) after {} steps at residual {:e}",
                    report.stop_reason,
                    report.iterations,
                    report.residual_history.last().copied().unwrap_or(f64::NAN)
                )));
            }
            return Ok(());
        }
        Command::Bench(b) => {
            let rows = run_bench(&BenchConfig {
                family: cli.grid_family()?,
                problem: cli.problem.clone(),
                ns: b.ns.clone(),
                reps: b.reps,
                ops: b.ops.clone(),
                seed: cli.seed,
            })?;
            match format {
                Format::Csv => to_csv(&rows)?,
                _ => to_json(&rows)?,
            }
        }
        Command::Memory(m) => {
            let nn = m.nn.unwrap_or(cli.n as u64 + 1);
            let bytes = memory_estimate(m.nx, m.nu, nn, m.bytes)?;
            let out = MemoryOutput {
                nx: m.nx,
                nu: m.nu,
                nn,
                bytes_per_value: m.bytes,
                values: hamiltonian_storage(m.nx, m.nu, nn).unwrap_or(bytes / m.bytes),
                bytes,
            };
            match format {
                Format::Csv => to_csv([out])?,
                _ => to_json(&out)?,
            }
        }
        Command::Table1(t) => {
            let rows: Vec<_> = t.rows.iter().map(|&n| table1_row(n, t.flops, t.bytes)).collect();
            match format {
                Format::Csv => to_csv(&rows)?,
                _ => to_json(&rows)?,
            }
        }
    };
    emit(cli.out.as_deref(), &bytes)
}

fn operators(cli: &Cli, n: usize) -> Result<BirkhoffOperators, CliError> {
    Ok(BirkhoffOperators::new(make_grid(GridSpec::new(cli.grid_family()?, n))?))
}

fn problem(cli: &Cli) -> Result<OcpProblem, CliError> {
    Ok(builtin_problem(&cli.problem)?)
}

fn grid(cli: &Cli, format: Format) -> Result<Vec<u8>, CliError> {
    let g = make_grid(GridSpec::new(cli.grid_family()?, cli.n))?;
    match format {
        Format::Csv => to_csv(g.nodes().iter().zip(g.weights()).enumerate().map(|(index, (&node, &weight))| {
            NodeRow { index, node, weight }
        })),
        _ => to_json(&GridOutput {
            family: g.family(),
            degree: g.degree(),
            nodes: g.nodes().to_vec(),
            weights: g.weights().to_vec(),
        }),
    }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn basis(cli: &Cli, format: Format) -> Result<Vec<u8>, CliError> {
    let ops = operators(cli, cli.n)?;
    match format {
        Format::Csv => {
            let mut entries = Vec::new();
            for (name, m) in [("ba", ops.ba()), ("bb", ops.bb())] {
                for row in 0..m.nrows() {
                    for col in 0..m.ncols() {
                        entries.push(MatrixEntry {
                            matrix: name.to_string(),
                            row,
                            col,
                            value: m[(row, col)],
                        });
                    }
                }
            }
            to_csv(entries)
        }
        _ => {
            let (ra, rb) = ops.max_row_abs_sums();
            let (ca, cb) = ops.max_column_abs_sums();
            to_json(&BasisOutput {
                family: ops.grid().family(),
                degree: ops.grid().degree(),
                nodes: ops.grid().nodes().to_vec(),
                weights: ops.weights().to_vec(),
                ba: rows_of(ops.ba()),
                bb: rows_of(ops.bb()),
                max_row_abs_sums: [ra, rb],
                max_column_abs_sums: [ca, cb],
                lemma1_residual: ops.lemma1_residual(),
            })
        }
    }
}

fn solve(cli: &Cli, opts: &SolverOptions) -> Result<SolveReport, CliError> {
    let problem = problem(cli)?;
    let ops = operators(cli, cli.n)?;
    let chi0 = initial_guess(&problem, ops.grid());
    Ok(newton_solve(&problem, &ops, chi0, opts)?)
}

fn trajectory_rows(report: &SolveReport) -> Vec<TrajectoryRow> {
    let t = &report.extracted;
    (0..t.tau.len())
        .map(|i| TrajectoryRow {
            index: i,
            tau: t.tau[i],
            x: t.x[i],
            u: t.u[i],
            lambda: t.lambda[i],
            v: t.v[i],
            omega: t.omega[i],
        })
        .collect()
}

/// The decision vector selected by `--at`.
pub fn iterate(
    at: At,
    problem: &OcpProblem,
    ops: &BirkhoffOperators,
    seed: u64,
) -> Result<DecisionVector, CliError> {
    let nn = ops.n_nodes();
    match at {
        At::Guess => Ok(initial_guess(problem, ops.grid())),
        At::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = (0..Layout::new(nn).len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            Ok(DecisionVector::from_flat(nn, data)?)
        }
        At::Solution => {
            let report = newton_solve(problem, ops, initial_guess(problem, ops.grid()), &SolverOptions::default())?;
            if report.converged {
                Ok(report.chi_star)
            } else {
                Err(CliError::Numerical(format!(
                    "Newton did not converge for {} at N={}",
                    problem.name(),
                    ops.grid().degree()
                )))
            }
        }
    }
}

fn assemble_cmd(cli: &Cli, format: Format, at: At, pattern: bool) -> Result<Vec<u8>, CliError> {
    let problem = problem(cli)?;
    let ops = operators(cli, cli.n)?;
    let chi = iterate(at, &problem, &ops, cli.seed)?;
    let k = assemble(&chi, &problem, &ops)?;
    let mut entries = Vec::with_capacity(k.pattern_count());
    k.for_each_entry(|row, col, value| entries.push(Entry { row, col, value }));
    match format {
        Format::Mtx => {
            let coo = k.to_coordinate();
            let coo = if pattern { coo.into_pattern() } else { coo };
            Ok(coo.to_mtx_string().into_bytes())
        }
        Format::Csv => to_csv(entries),
        Format::Json => to_json(&AssembleOutput {
            problem: problem.name().to_string(),
            family: ops.grid().family(),
            degree: ops.grid().degree(),
            at,
            dim: k.dim(),
            nnz: k.nnz_report(1, 1)?,
            hamiltonian_diagonals: k.hamiltonian_diagonals().clone(),
            endpoint_block: *k.endpoint_block(),
            entries,
        }),
    }
}

fn spectrum(cli: &Cli, format: Format, at: At) -> Result<Vec<u8>, CliError> {
    let problem = problem(cli)?;
    let ops = operators(cli, cli.n)?;
    let chi = iterate(at, &problem, &ops, cli.seed)?;
    let k = assemble(&chi, &problem, &ops)?;
    let report = verify_theorem1(&k)?;
    match format {
        Format::Csv => to_csv(
            report
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(index, z)| EigenRow { index, re: z.re, im: z.im }),
        ),
        _ => to_json(&SpectrumOutput {
            problem: problem.name().to_string(),
            family: ops.grid().family(),
            degree: ops.grid().degree(),
            at,
            report,
            column_sums: column_sum_report(&ops),
        }),
    }
}

fn sweep(cli: &Cli, format: Format, ns: &[usize]) -> Result<Vec<u8>, CliError> {
    let problem = problem(cli)?;
    let family = cli.grid_family()?;
    let rows = spectral_radius_sweep(&problem, family, ns, &SolverOptions::default())?;
    match format {
        Format::Csv => to_csv(&rows),
        _ => to_json(&SweepOutput {
            problem: problem.name().to_string(),
            family,
            rows,
        }),
    }
}
