//! Decision vector, first-order residual and the Birkhoff Hessian.
//!
//! Unknowns and residual rows share one layout,
//!
//! ```text
//! [ X | Lambda | V | Omega | U | x^a | lambda^b | x^b | nu | lambda^a ]
//! ```
//!
//! with five node-valued blocks of length `N_n = N + 1` followed by five
//! scalars, so that residual block `k` lines up with unknown block `k` and the
//! Hessian has identity blocks on most of its diagonal.

mod alt;
mod matrix;
mod residual;
mod split;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::birkhoff::BirkhoffError;
use crate::grid::Grid;
use crate::model::{AnalyticSolution, ModelError};

pub use alt::{assemble_alt, AltLayout};
pub use matrix::{
    assemble, HamiltonianDiagonals, KktMatrix, NnzReport, DEFAULT_DENSE_CAP, ENDPOINT_PATTERN,
};
pub use residual::residual;
pub use split::{permute_split, SplitKkt};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KktError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("dense materialization of a {n}x{n} matrix exceeds the cap of {cap}")]
    DenseCap { n: usize, cap: usize },
    #[error("state and control counts must be at least 1 (got N_x={nx}, N_u={nu})")]
    InvalidCounts { nx: usize, nu: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Birkhoff(#[from] BirkhoffError),
}

/// Offsets of every segment of the decision vector (and of the residual).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    n_nodes: usize,
}

impl Layout {
    pub const SCALARS: usize = 5;

    pub fn new(n_nodes: usize) -> Self {
        Self { n_nodes }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Total length `5 N_n + 5`.
    pub fn len(&self) -> usize {
        5 * self.n_nodes + Self::SCALARS
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node block `k` in `0..5` (X, Lambda, V, Omega, U).
    pub fn block(&self, k: usize) -> Range<usize> {
        debug_assert!(k < 5);
        k * self.n_nodes..(k + 1) * self.n_nodes
    }

    pub fn x(&self) -> Range<usize> {
        self.block(0)
    }
    pub fn lambda(&self) -> Range<usize> {
        self.block(1)
    }
    pub fn v(&self) -> Range<usize> {
        self.block(2)
    }
    pub fn omega(&self) -> Range<usize> {
        self.block(3)
    }
    pub fn u(&self) -> Range<usize> {
        self.block(4)
    }

    /// Scalar slot `k` in `0..5` (x^a, lambda^b, x^b, nu, lambda^a).
    pub fn scalar(&self, k: usize) -> usize {
        debug_assert!(k < Self::SCALARS);
        5 * self.n_nodes + k
    }

    pub fn xa(&self) -> usize {
        self.scalar(0)
    }
    pub fn lambda_b(&self) -> usize {
        self.scalar(1)
    }
    pub fn xb(&self) -> usize {
        self.scalar(2)
    }
    pub fn nu(&self) -> usize {
        self.scalar(3)
    }
    pub fn lambda_a(&self) -> usize {
        self.scalar(4)
    }
}

/// Flat primal-dual iterate in the fixed ordering of [`Layout`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Segments", try_from = "Segments")]
pub struct DecisionVector {
    n_nodes: usize,
    data: Vec<f64>,
}

impl DecisionVector {
    pub fn zeros(n_nodes: usize) -> Self {
        Self {
            n_nodes,
            data: vec![0.0; Layout::new(n_nodes).len()],
        }
    }

    pub fn from_flat(n_nodes: usize, data: Vec<f64>) -> Result<Self, KktError> {
        let expected = Layout::new(n_nodes).len();
        if data.len() != expected || n_nodes == 0 {
            return Err(KktError::Dimension {
                expected,
                got: data.len(),
            });
        }
        Ok(Self { n_nodes, data })
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.n_nodes)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    pub fn x(&self) -> &[f64] {
        &self.data[self.layout().x()]
    }
    pub fn lambda(&self) -> &[f64] {
        &self.data[self.layout().lambda()]
    }
    pub fn v(&self) -> &[f64] {
        &self.data[self.layout().v()]
    }
    pub fn omega(&self) -> &[f64] {
        &self.data[self.layout().omega()]
    }
    pub fn u(&self) -> &[f64] {
        &self.data[self.layout().u()]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut [f64] {
        let r = self.layout().block(k);
        &mut self.data[r]
    }

    pub fn xa(&self) -> f64 {
        self.data[self.layout().xa()]
    }
    pub fn lambda_b(&self) -> f64 {
        self.data[self.layout().lambda_b()]
    }
    pub fn xb(&self) -> f64 {
        self.data[self.layout().xb()]
    }
    pub fn nu(&self) -> f64 {
        self.data[self.layout().nu()]
    }
    pub fn lambda_a(&self) -> f64 {
        self.data[self.layout().lambda_a()]
    }

    /// Samples a closed-form extremal at the grid nodes, with `V = x'` and
    /// `Omega = lambda'`.
    pub fn from_analytic(solution: &AnalyticSolution, grid: &Grid) -> Self {
        let nn = grid.n_nodes();
        let mut chi = Self::zeros(nn);
        let curves = [
            &solution.state,
            &solution.costate,
            &solution.state_rate,
            &solution.costate_rate,
            &solution.control,
        ];
        for (k, curve) in curves.into_iter().enumerate() {
            for (slot, &t) in chi.block_mut(k).iter_mut().zip(grid.nodes()) {
                *slot = curve(t);
            }
        }
        let scalars = [
            solution.xa,
            solution.lambda_b,
            solution.xb,
            solution.nu,
            solution.lambda_a,
        ];
        for (k, s) in scalars.into_iter().enumerate() {
            chi.set_scalar(k, s);
        }
        chi
    }

    /// Sets scalar slot `k` (see [`Layout::scalar`]).
    pub fn set_scalar(&mut self, k: usize, value: f64) {
        let i = self.layout().scalar(k);
        self.data[i] = value;
    }
}

/// Named-segment form used for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Segments {
    x: Vec<f64>,
    lambda: Vec<f64>,
    v: Vec<f64>,
    omega: Vec<f64>,
    u: Vec<f64>,
    xa: f64,
    lambda_b: f64,
    xb: f64,
    nu: f64,
    lambda_a: f64,
}

impl From<DecisionVector> for Segments {
    fn from(d: DecisionVector) -> Self {
        Segments {
            x: d.x().to_vec(),
            lambda: d.lambda().to_vec(),
            v: d.v().to_vec(),
            omega: d.omega().to_vec(),
            u: d.u().to_vec(),
            xa: d.xa(),
            lambda_b: d.lambda_b(),
            xb: d.xb(),
            nu: d.nu(),
            lambda_a: d.lambda_a(),
        }
    }
}

impl TryFrom<Segments> for DecisionVector {
    type Error = KktError;

    fn try_from(s: Segments) -> Result<Self, Self::Error> {
        let nn = s.x.len();
        for seg in [&s.lambda, &s.v, &s.omega, &s.u] {
            if seg.len() != nn {
                return Err(KktError::Dimension {
                    expected: nn,
                    got: seg.len(),
                });
            }
        }
        let mut data = Vec::with_capacity(5 * nn + 5);
        for seg in [s.x, s.lambda, s.v, s.omega, s.u] {
            data.extend(seg);
        }
        data.extend([s.xa, s.lambda_b, s.xb, s.nu, s.lambda_a]);
        DecisionVector::from_flat(nn, data)
    }
}
