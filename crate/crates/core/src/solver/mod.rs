//! Damped Newton iteration on the first-order system `F(chi) = 0`.

mod krylov;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::birkhoff::BirkhoffOperators;
use crate::grid::{Grid, GridFamily};
use crate::kkt::{assemble, residual, DecisionVector, KktError};
use crate::model::{hamiltonian_eval, OcpProblem};

pub use krylov::{krylov_linear_solve, KrylovError, KrylovSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearPath {
    #[default]
    DenseLu,
    StructuredKrylov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stop once `||F||_inf` falls to this level.
    pub tol: f64,
    pub linear_path: LinearPath,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    pub min_step: f64,
    pub krylov_tol: f64,
    pub krylov_restart: usize,
    /// Cosine-transform products inside the Krylov path (Chebyshev grids).
    pub fast_matvec: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-10,
            linear_path: LinearPath::DenseLu,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            min_step: 1e-12,
            krylov_tol: 1e-12,
            krylov_restart: 50,
            fast_matvec: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |what: &str| Err(SolverError::InvalidOptions(what.to_string()));
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return bad("armijo_shrink must lie in (0, 1)");
        }
        if !(self.tol > 0.0 && self.min_step > 0.0 && self.krylov_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.krylov_restart == 0 {
            return bad("krylov_restart must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("singular Newton system at iteration {iteration}")]
    Singular { iteration: usize },
    #[error("linear solve failed at iteration {iteration}: {source}")]
    Krylov {
        iteration: usize,
        #[source]
        source: KrylovError,
    },
    #[error("residual is not finite at the initial guess")]
    NonFiniteStart,
    #[error(transparent)]
    Kkt(#[from] KktError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    LineSearchStalled,
}

/// Node values of the discrete solution plus the endpoint scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub tau: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    pub v: Vec<f64>,
    pub omega: Vec<f64>,
    pub xa: f64,
    pub xb: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub nu: f64,
}

impl Trajectory {
    pub fn extract(chi: &DecisionVector, grid: &Grid) -> Self {
        Self {
            tau: grid.nodes().to_vec(),
            x: chi.x().to_vec(),
            u: chi.u().to_vec(),
            lambda: chi.lambda().to_vec(),
            v: chi.v().to_vec(),
            omega: chi.omega().to_vec(),
            xa: chi.xa(),
            xb: chi.xb(),
            lambda_a: chi.lambda_a(),
            lambda_b: chi.lambda_b(),
            nu: chi.nu(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: String,
    pub family: GridFamily,
    pub degree: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Accepted Newton steps.
    pub iterations: usize,
    /// `||F||_inf` at the initial guess and after every accepted step.
    pub residual_history: Vec<f64>,
    pub step_lengths: Vec<f64>,
    pub rejected_steps: usize,
    pub chi_star: DecisionVector,
    pub extracted: Trajectory,
}

/// Constant starting point: `X = Lambda = 1`, `V = Omega = U = 0`,
/// `x^a = x^b = lambda^b = lambda^a = 1`, `nu = 0`.
pub fn initial_guess(_problem: &OcpProblem, grid: &Grid) -> DecisionVector {
    let mut chi = DecisionVector::zeros(grid.n_nodes());
    chi.block_mut(0).fill(1.0);
    chi.block_mut(1).fill(1.0);
    for (k, v) in [1.0, 1.0, 1.0, 0.0, 1.0].into_iter().enumerate() {
        chi.set_scalar(k, v);
    }
    chi
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn half_sq(v: &[f64]) -> f64 {
    0.5 * v.iter().map(|x| x * x).sum::<f64>()
}

/// Solves `F(chi) = 0` from `chi0` with Armijo backtracking on `||F||^2 / 2`.
///
/// A stalled line search ends the run with `converged = false` rather than
/// an error; a singular Newton matrix is an error.
pub fn newton_solve(
    problem: &OcpProblem,
    ops: &BirkhoffOperators,
    chi0: DecisionVector,
    opts: &SolverOptions,
) -> Result<SolveReport, SolverError> {
    opts.validate()?;
    let mut chi = chi0;
    let mut f = residual(&chi, problem, ops)?;
    if !f.iter().all(|v| v.is_finite()) {
        return Err(SolverError::NonFiniteStart);
    }
    let mut history = vec![inf_norm(&f)];
    let mut steps = Vec::new();
    let mut rejected = 0;
    let mut stop = StopReason::MaxIterations;

    for iteration in 0..=opts.max_iter {
        if inf_norm(&f) <= opts.tol {
            stop = StopReason::Converged;
            break;
        }
        if iteration == opts.max_iter {
            break;
        }
        let d = newton_direction(&chi, &f, problem, ops, opts, iteration)?;

        let phi = half_sq(&f);
        let mut alpha = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = chi
                .as_slice()
                .iter()
                .zip(&d)
                .map(|(c, di)| c + alpha * di)
                .collect();
            let trial = DecisionVector::from_flat(chi.n_nodes(), trial)?;
            // a non-finite model evaluation counts as a rejected step
            if let Ok(ft) = residual(&trial, problem, ops) {
                if ft.iter().all(|v| v.is_finite())
                    && half_sq(&ft) <= (1.0 - 2.0 * opts.armijo_c * alpha) * phi
                {
                    break Some((trial, ft));
                }
            }
            rejected += 1;
            alpha *= opts.armijo_shrink;
            if alpha < opts.min_step {
                break None;
            }
        };
        match accepted {
            Some((trial, ft)) => {
                chi = trial;
                f = ft;
                history.push(inf_norm(&f));
                steps.push(alpha);
            }
            None => {
                stop = StopReason::LineSearchStalled;
                break;
            }
        }
    }

    Ok(SolveReport {
        problem: problem.name().to_string(),
        family: ops.grid().family(),
        degree: ops.grid().degree(),
        converged: stop == StopReason::Converged,
        stop_reason: stop,
        iterations: steps.len(),
        residual_history: history,
        step_lengths: steps,
        rejected_steps: rejected,
        extracted: Trajectory::extract(&chi, ops.grid()),
        chi_star: chi,
    })
}

fn newton_direction(
    chi: &DecisionVector,
    f: &[f64],
    problem: &OcpProblem,
    ops: &BirkhoffOperators,
    opts: &SolverOptions,
    iteration: usize,
) -> Result<Vec<f64>, SolverError> {
    let k = assemble(chi, problem, ops)?;
    let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
    let d = match opts.linear_path {
        LinearPath::DenseLu => {
            let a = k.to_dense()?;
            a.lu()
                .solve(&DVector::from_vec(rhs))
                .ok_or(SolverError::Singular { iteration })?
                .data
                .into()
        }
        LinearPath::StructuredKrylov => {
            let fast = opts.fast_matvec && ops.grid().family() == GridFamily::ChebyshevLobatto;
            let k = k.with_fast_path(fast)?;
            krylov_linear_solve(&k, &rhs, opts.krylov_tol, opts.krylov_restart)
                .map_err(|source| SolverError::Krylov { iteration, source })?
                .x
        }
    };
    if !d.iter().all(|v: &f64| v.is_finite()) {
        return Err(SolverError::Singular { iteration });
    }
    Ok(d)
}

/// Endpoint errors against the closed-form values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointErrors {
    pub xa: f64,
    pub xb: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub nu: f64,
}

/// Node-wise max-abs errors of a solve. Analytic fields are `None` when the
/// problem has no closed-form solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionErrors {
    pub state_err: Option<f64>,
    pub costate_err: Option<f64>,
    pub control_err: Option<f64>,
    pub endpoint_errs: Option<EndpointErrors>,
    /// `max_ij |H_i - H_j|` over the nodes.
    pub hamiltonian_variation: f64,
}

pub fn verify_solution(report: &SolveReport, problem: &OcpProblem) -> Result<SolutionErrors, SolverError> {
    let t = &report.extracted;
    let mut hmin = f64::INFINITY;
    let mut hmax = f64::NEG_INFINITY;
    for i in 0..t.tau.len() {
        let h = hamiltonian_eval(problem, t.lambda[i], t.x[i], t.u[i])
            .map_err(KktError::from)?
            .h;
        hmin = hmin.min(h);
        hmax = hmax.max(h);
    }
    let max_err = |vals: &[f64], curve: &dyn Fn(f64) -> f64| {
        vals.iter()
            .zip(&t.tau)
            .fold(0.0_f64, |m, (v, &tau)| m.max((v - curve(tau)).abs()))
    };
    let mut out = SolutionErrors {
        state_err: None,
        costate_err: None,
        control_err: None,
        endpoint_errs: None,
        hamiltonian_variation: hmax - hmin,
    };
    if let Some(sol) = problem.analytic() {
        out.state_err = Some(max_err(&t.x, &*sol.state));
        out.costate_err = Some(max_err(&t.lambda, &*sol.costate));
        out.control_err = Some(max_err(&t.u, &*sol.control));
        out.endpoint_errs = Some(EndpointErrors {
            xa: (t.xa - sol.xa).abs(),
            xb: (t.xb - sol.xb).abs(),
            lambda_a: (t.lambda_a - sol.lambda_a).abs(),
            lambda_b: (t.lambda_b - sol.lambda_b).abs(),
            nu: (t.nu - sol.nu).abs(),
        });
    }
    Ok(out)
}
