use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::birkhoff::{BirkhoffError, BirkhoffOperators};
use crate::complexity::hamiltonian_storage;
use crate::grid::GridFamily;
use crate::kkt::{DecisionVector, KktError, Layout};
use crate::matrix_market::CoordinateMatrix;
use crate::model::{endpoint_eval, hamiltonian_eval, OcpProblem};

/// Largest dimension `to_dense` materializes by default (`N = 512`).
pub const DEFAULT_DENSE_CAP: usize = 5 * 513 + 5;

/// Structural nonzeros of the 5x5 endpoint block, rows `F_6..F_10` against
/// columns `(x^a, lambda^b, x^b, nu, lambda^a)`.
pub const ENDPOINT_PATTERN: [[bool; 5]; 5] = [
    [true, false, true, false, false],
    [false, true, false, false, true],
    [true, true, true, true, false],
    [true, false, true, false, false],
    [true, false, true, true, true],
];

/// Node-wise second derivatives of the Hamiltonian; mixed partials are
/// stored once.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HamiltonianDiagonals {
    pub lambda_x: Vec<f64>,
    pub lambda_u: Vec<f64>,
    pub xx: Vec<f64>,
    pub xu: Vec<f64>,
    pub uu: Vec<f64>,
}

impl HamiltonianDiagonals {
    /// Number of stored values, `5 N_n`.
    pub fn stored_values(&self) -> usize {
        self.lambda_x.len() + self.lambda_u.len() + self.xx.len() + self.xu.len() + self.uu.len()
    }
}

/// The Birkhoff Hessian `A = dF/dchi` held in structured form: the grid's
/// constant skeleton comes from the shared operators, and only the five
/// Hamiltonian diagonals and the 5x5 endpoint block depend on the iterate.
#[derive(Debug, Clone)]
pub struct KktMatrix<'a> {
    ops: &'a BirkhoffOperators,
    hdiag: HamiltonianDiagonals,
    endpoint: [[f64; 5]; 5],
    fast: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NnzReport {
    pub hamiltonian_values: u64,
    pub total_pattern: usize,
    pub bytes: u64,
}

/// Assembles `A` at `chi`.
pub fn assemble<'a>(
    chi: &DecisionVector,
    problem: &OcpProblem,
    ops: &'a BirkhoffOperators,
) -> Result<KktMatrix<'a>, KktError> {
    let nn = ops.n_nodes();
    if chi.n_nodes() != nn {
        return Err(KktError::Dimension {
            expected: nn,
            got: chi.n_nodes(),
        });
    }
    let mut hdiag = HamiltonianDiagonals {
        lambda_x: Vec::with_capacity(nn),
        lambda_u: Vec::with_capacity(nn),
        xx: Vec::with_capacity(nn),
        xu: Vec::with_capacity(nn),
        uu: Vec::with_capacity(nn),
    };
    for i in 0..nn {
        let h = hamiltonian_eval(problem, chi.lambda()[i], chi.x()[i], chi.u()[i])?;
        hdiag.lambda_x.push(h.h_lambda_x);
        hdiag.lambda_u.push(h.h_lambda_u);
        hdiag.xx.push(h.h_xx);
        hdiag.xu.push(h.h_xu);
        hdiag.uu.push(h.h_uu);
    }
    let e = endpoint_eval(problem, chi.nu(), chi.xa(), chi.xb())?;
    let endpoint = [
        [1.0, 0.0, -1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, -1.0],
        [e.e_ab, -1.0, e.e_bb, e.e_b_nu, 0.0],
        [e.e_a_nu, 0.0, e.e_b_nu, 0.0, 0.0],
        [e.e_aa, 0.0, e.e_ab, e.e_a_nu, 1.0],
    ];
    Ok(KktMatrix {
        ops,
        hdiag,
        endpoint,
        fast: false,
    })
}

impl<'a> KktMatrix<'a> {
    pub fn ops(&self) -> &'a BirkhoffOperators {
        self.ops
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.ops.n_nodes())
    }

    /// Dimension `n = 5 N_n + 5`.
    pub fn dim(&self) -> usize {
        self.layout().len()
    }

    pub fn hamiltonian_diagonals(&self) -> &HamiltonianDiagonals {
        &self.hdiag
    }

    pub fn endpoint_block(&self) -> &[[f64; 5]; 5] {
        &self.endpoint
    }

    pub fn fast_path(&self) -> bool {
        self.fast
    }

    /// Routes the `B^a`/`B^b` products in [`matvec`](Self::matvec) through the
    /// cosine transform. Chebyshev grids only.
    pub fn with_fast_path(mut self, enabled: bool) -> Result<Self, KktError> {
        if enabled && self.ops.grid().family() != GridFamily::ChebyshevLobatto {
            return Err(BirkhoffError::UnsupportedGrid(self.ops.grid().family()).into());
        }
        self.fast = enabled;
        Ok(self)
    }

    /// Visits every structural entry `(row, col, value)` of `A`, row block by
    /// row block. Zero-valued data entries are still visited.
    pub fn for_each_entry(&self, mut visit: impl FnMut(usize, usize, f64)) {
        let l = self.layout();
        let nn = l.n_nodes();
        let (x, lam, v, om, u) = (l.x().start, l.lambda().start, l.v().start, l.omega().start, l.u().start);
        let ba = self.ops.ba();
        let bb = self.ops.bb();
        let h = &self.hdiag;

        for i in 0..nn {
            visit(i, x + i, 1.0);
            for j in 0..nn {
                visit(i, v + j, -ba[(i, j)]);
            }
            visit(i, l.xa(), -1.0);
        }
        for i in 0..nn {
            let r = nn + i;
            visit(r, lam + i, 1.0);
            for j in 0..nn {
                visit(r, om + j, -bb[(i, j)]);
            }
            visit(r, l.lambda_b(), -1.0);
        }
        for i in 0..nn {
            let r = 2 * nn + i;
            visit(r, x + i, -h.lambda_x[i]);
            visit(r, v + i, 1.0);
            visit(r, u + i, -h.lambda_u[i]);
        }
        for i in 0..nn {
            let r = 3 * nn + i;
            visit(r, x + i, h.xx[i]);
            visit(r, lam + i, h.lambda_x[i]);
            visit(r, om + i, 1.0);
            visit(r, u + i, h.xu[i]);
        }
        for i in 0..nn {
            let r = 4 * nn + i;
            visit(r, x + i, h.xu[i]);
            visit(r, lam + i, h.lambda_u[i]);
            visit(r, u + i, h.uu[i]);
        }
        let w = self.ops.weights();
        for (j, &wj) in w.iter().enumerate() {
            visit(l.scalar(0), v + j, wj);
        }
        for (j, &wj) in w.iter().enumerate() {
            visit(l.scalar(1), om + j, -wj);
        }
        for (r, (vals, mask)) in self.endpoint.iter().zip(ENDPOINT_PATTERN).enumerate() {
            for c in 0..5 {
                if mask[c] {
                    visit(l.scalar(r), l.scalar(c), vals[c]);
                }
            }
        }
    }

    /// Number of structural positions of `A`.
    pub fn pattern_count(&self) -> usize {
        let mut count = 0;
        self.for_each_entry(|_, _, _| count += 1);
        count
    }

    /// Dense `A`, refusing anything larger than [`DEFAULT_DENSE_CAP`].
    pub fn to_dense(&self) -> Result<DMatrix<f64>, KktError> {
        self.to_dense_capped(DEFAULT_DENSE_CAP)
    }

    pub fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<f64>, KktError> {
        let n = self.dim();
        if n > cap {
            return Err(KktError::DenseCap { n, cap });
        }
        let mut a = DMatrix::zeros(n, n);
        self.for_each_entry(|r, c, val| a[(r, c)] = val);
        Ok(a)
    }

    /// Coordinate (Matrix Market) form of the structural entries.
    pub fn to_coordinate(&self) -> CoordinateMatrix {
        let n = self.dim();
        let mut m = CoordinateMatrix::new(n, n);
        self.for_each_entry(|r, c, val| m.push(r, c, val));
        m
    }

    /// `A v` computed block by block without densifying.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, KktError> {
        let l = self.layout();
        if v.len() != l.len() {
            return Err(KktError::Dimension {
                expected: l.len(),
                got: v.len(),
            });
        }
        let nn = l.n_nodes();
        let (x, lam, vv, om, u) = (&v[l.x()], &v[l.lambda()], &v[l.v()], &v[l.omega()], &v[l.u()]);
        let s: [f64; 5] = std::array::from_fn(|k| v[l.scalar(k)]);
        let (ba_v, bb_om) = if self.fast {
            (self.ops.apply_ba_fast(vv)?, self.ops.apply_bb_fast(om)?)
        } else {
            (self.ops.apply_ba(vv), self.ops.apply_bb(om))
        };
        let h = &self.hdiag;
        let mut y = vec![0.0; l.len()];
        for i in 0..nn {
            y[i] = x[i] - ba_v[i] - s[0];
            y[nn + i] = lam[i] - bb_om[i] - s[1];
            y[2 * nn + i] = -h.lambda_x[i] * x[i] + vv[i] - h.lambda_u[i] * u[i];
            y[3 * nn + i] = h.xx[i] * x[i] + h.lambda_x[i] * lam[i] + om[i] + h.xu[i] * u[i];
            y[4 * nn + i] = h.xu[i] * x[i] + h.lambda_u[i] * lam[i] + h.uu[i] * u[i];
        }
        let w = self.ops.weights();
        let wv: f64 = w.iter().zip(vv).map(|(a, b)| a * b).sum();
        let wom: f64 = w.iter().zip(om).map(|(a, b)| a * b).sum();
        for r in 0..5 {
            let mut acc: f64 = self.endpoint[r].iter().zip(&s).map(|(a, b)| a * b).sum();
            match r {
                0 => acc += wv,
                1 => acc -= wom,
                _ => {}
            }
            y[l.scalar(r)] = acc;
        }
        Ok(y)
    }

    /// Max-abs entry of `A - A^T`.
    pub fn asymmetry(&self) -> Result<f64, KktError> {
        let a = self.to_dense()?;
        Ok(max_abs_asymmetry(&a))
    }

    /// Storage report for the Hamiltonian data of a problem with `nx` states
    /// and `nu` controls on this grid, at 8 bytes per value.
    pub fn nnz_report(&self, nx: usize, nu: usize) -> Result<NnzReport, KktError> {
        let nn = self.ops.n_nodes();
        if nx == 0 || nu == 0 {
            return Err(KktError::InvalidCounts { nx, nu });
        }
        let values = hamiltonian_storage(nx as u64, nu as u64, nn as u64)
            .ok_or(KktError::InvalidCounts { nx, nu })?;
        Ok(NnzReport {
            hamiltonian_values: values,
            total_pattern: self.pattern_count(),
            bytes: values.saturating_mul(8),
        })
    }
}

pub(crate) fn max_abs_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}
