//! Birkhoff integration matrices on a Lobatto grid.
//!
//! Column `j` of `B^a` holds the values at the nodes of the antiderivative of
//! the `j`-th Lagrange cardinal polynomial, anchored to vanish at `tau = -1`;
//! `B^b` is the same antiderivative anchored at `tau = +1`. Applied to the
//! virtual control values `V`, they reconstruct the state from either end.
//!
//! Both matrices are built by expanding the cardinal polynomials in the grid's
//! own modal basis (Chebyshev or Legendre), antidifferentiating the
//! coefficients with the three-term identity, and evaluating back at the nodes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::grid::{Grid, GridFamily};
use crate::poly::legendre_all;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BirkhoffError {
    #[error("fast application requires a Chebyshev-Lobatto grid, got {0}")]
    UnsupportedGrid(GridFamily),
    #[error("vector length {got} does not match the {expected} grid nodes")]
    Dimension { expected: usize, got: usize },
}

/// Which endpoint the antiderivative is pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    /// Vanishes at `tau = -1` (the `B^a` operator).
    Left,
    /// Vanishes at `tau = +1` (the `B^b` operator).
    Right,
}

/// Dense `B^a`, `B^b` for one grid, plus the FFT integrator on Chebyshev grids.
#[derive(Debug, Clone)]
pub struct BirkhoffOperators {
    grid: Grid,
    ba: DMatrix<f64>,
    bb: DMatrix<f64>,
    fast: Option<ChebyshevIntegrator>,
}

/// Builds `B^a` and `B^b` for `grid`.
pub fn build_operators(grid: &Grid) -> BirkhoffOperators {
    BirkhoffOperators::new(grid.clone())
}

impl BirkhoffOperators {
    pub fn new(grid: Grid) -> Self {
        let antiderivative = modal_antiderivative_at_nodes(&grid);
        let n = grid.degree();
        let left = antiderivative.row(0).clone_owned();
        let right = antiderivative.row(n).clone_owned();
        let mut ba = antiderivative.clone();
        let mut bb = antiderivative;
        for mut row in ba.row_iter_mut() {
            row -= &left;
        }
        for mut row in bb.row_iter_mut() {
            row -= &right;
        }
        let fast = match grid.family() {
            GridFamily::ChebyshevLobatto => Some(ChebyshevIntegrator::new(n)),
            GridFamily::LegendreLobatto => None,
        };
        Self { grid, ba, bb, fast }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.grid.weights()
    }

    pub fn ba(&self) -> &DMatrix<f64> {
        &self.ba
    }

    pub fn bb(&self) -> &DMatrix<f64> {
        &self.bb
    }

    pub fn fast_integrator(&self) -> Option<&ChebyshevIntegrator> {
        self.fast.as_ref()
    }

    /// Dense `B^a v`.
    pub fn apply_ba(&self, v: &[f64]) -> Vec<f64> {
        dense_apply(&self.ba, v)
    }

    /// Dense `B^b v`.
    pub fn apply_bb(&self, v: &[f64]) -> Vec<f64> {
        dense_apply(&self.bb, v)
    }

    /// `B^a v` through the cosine transform, without touching the dense matrix.
    pub fn apply_ba_fast(&self, v: &[f64]) -> Result<Vec<f64>, BirkhoffError> {
        self.fast_apply(v, Anchor::Left)
    }

    /// `B^b v` through the cosine transform.
    pub fn apply_bb_fast(&self, v: &[f64]) -> Result<Vec<f64>, BirkhoffError> {
        self.fast_apply(v, Anchor::Right)
    }

    fn fast_apply(&self, v: &[f64], anchor: Anchor) -> Result<Vec<f64>, BirkhoffError> {
        let fast = self
            .fast
            .as_ref()
            .ok_or(BirkhoffError::UnsupportedGrid(self.grid.family()))?;
        fast.apply(v, anchor)
    }

    /// Max-abs entry of `W_B B^b + (B^a)^T W_B`.
    ///
    /// This is not zero at finite `N`: the `(0, 0)` entry is exactly `-w_0^2`,
    /// so the residual only vanishes asymptotically as the end weights shrink.
    pub fn lemma1_residual(&self) -> f64 {
        let w = self.weights();
        let n = w.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let r = w[i] * self.bb[(i, j)] + self.ba[(j, i)] * w[j];
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    /// Largest row abs-sum of `(B^a, B^b)`.
    pub fn max_row_abs_sums(&self) -> (f64, f64) {
        (max_row_abs_sum(&self.ba), max_row_abs_sum(&self.bb))
    }

    /// Largest column abs-sum of `(B^a, B^b)`.
    pub fn max_column_abs_sums(&self) -> (f64, f64) {
        (
            max_row_abs_sum(&self.ba.transpose()),
            max_row_abs_sum(&self.bb.transpose()),
        )
    }
}

fn max_row_abs_sum(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn dense_apply(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    assert_eq!(v.len(), m.ncols(), "vector length must equal the node count");
    let x = DVector::from_column_slice(v);
    let mut y = DVector::zeros(m.nrows());
    y.gemv(1.0, m, &x, 0.0);
    y.data.into()
}

/// Values at the nodes of an (unanchored) antiderivative of every cardinal
/// polynomial: entry `(i, j)` is `L_j(tau_i)` with `L_j' = l_j`.
fn modal_antiderivative_at_nodes(grid: &Grid) -> DMatrix<f64> {
    let n = grid.degree();
    let nn = n + 1;
    let nodes = grid.nodes();
    // phi[(i, k)] = basis polynomial k (degree 0..=N+1) at node i
    let phi = match grid.family() {
        GridFamily::ChebyshevLobatto => DMatrix::from_fn(nn, n + 2, |i, k| chebyshev_at_node(n, k, i)),
        GridFamily::LegendreLobatto => {
            let mut phi = DMatrix::zeros(nn, n + 2);
            let mut buf = vec![0.0; n + 2];
            for (i, &t) in nodes.iter().enumerate() {
                legendre_all(t, &mut buf);
                for (k, &p) in buf.iter().enumerate() {
                    phi[(i, k)] = p;
                }
            }
            phi
        }
    };

    // coeffs[(k, j)]: coefficient of basis k in cardinal l_j
    let coeffs = match grid.family() {
        GridFamily::ChebyshevLobatto => {
            let nf = n as f64;
            let cbar = |k: usize| if k == 0 || k == n { 2.0 } else { 1.0 };
            DMatrix::from_fn(nn, nn, |k, j| 2.0 / (nf * cbar(j) * cbar(k)) * phi[(j, k)])
        }
        GridFamily::LegendreLobatto => {
            let w = grid.weights();
            let nf = n as f64;
            // discrete norm of P_N on the Lobatto grid is 2/N, not 2/(2N+1)
            let gamma = |k: usize| if k == n { 2.0 / nf } else { 2.0 / (2.0 * k as f64 + 1.0) };
            DMatrix::from_fn(nn, nn, |k, j| w[j] * phi[(j, k)] / gamma(k))
        }
    };

    let a = |k: usize, j: usize| if k <= n { coeffs[(k, j)] } else { 0.0 };
    let integrated = match grid.family() {
        GridFamily::ChebyshevLobatto => DMatrix::from_fn(n + 2, nn, |k, j| match k {
            0 => 0.0,
            1 => a(0, j) - 0.5 * a(2, j),
            _ => (a(k - 1, j) - a(k + 1, j)) / (2.0 * k as f64),
        }),
        GridFamily::LegendreLobatto => DMatrix::from_fn(n + 2, nn, |k, j| match k {
            0 => 0.0,
            _ => {
                let kf = k as f64;
                a(k - 1, j) / (2.0 * kf - 1.0) - a(k + 1, j) / (2.0 * kf + 3.0)
            }
        }),
    };
    drop(coeffs);
    phi * integrated
}

/// `T_k` at the `i`-th node `-cos(i pi / N)`, i.e. `(-1)^k cos(k i pi / N)`,
/// with the cosine argument reduced mod `2 pi` exactly in integers.
fn chebyshev_at_node(n: usize, k: usize, i: usize) -> f64 {
    let m = (k * i) % (2 * n);
    let c = (PI * m as f64 / n as f64).cos();
    if k.is_multiple_of(2) {
        c
    } else {
        -c
    }
}

/// Matrix-free `B^a` / `B^b` application on a Chebyshev-Lobatto grid in
/// `O(N log N)`: values to Chebyshev coefficients by a type-I cosine
/// transform, coefficient-wise antiderivative, and back to values.
#[derive(Clone)]
pub struct ChebyshevIntegrator {
    degree: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for ChebyshevIntegrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChebyshevIntegrator")
            .field("degree", &self.degree)
            .finish_non_exhaustive()
    }
}

impl ChebyshevIntegrator {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 2, "degree must be at least 2");
        let fft = FftPlanner::new().plan_fft_forward(2 * degree);
        Self { degree, fft }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn apply(&self, v: &[f64], anchor: Anchor) -> Result<Vec<f64>, BirkhoffError> {
        let n = self.degree;
        if v.len() != n + 1 {
            return Err(BirkhoffError::Dimension {
                expected: n + 1,
                got: v.len(),
            });
        }
        let nf = n as f64;

        // Y_k = v_0 + (-1)^k v_N + 2 sum_{j=1}^{N-1} v_j cos(k j pi / N)
        let y = self.even_transform(v);
        let a: Vec<f64> = (0..=n)
            .map(|k| {
                let cbar = if k == 0 || k == n { 2.0 } else { 1.0 };
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * y[k] / (nf * cbar)
            })
            .collect();

        let coef = |k: usize| if k <= n { a[k] } else { 0.0 };
        let mut b = vec![0.0; n + 2];
        b[1] = coef(0) - 0.5 * coef(2);
        for (k, bk) in b.iter_mut().enumerate().skip(2) {
            *bk = (coef(k - 1) - coef(k + 1)) / (2.0 * k as f64);
        }

        // T_k(tau_i) = (-1)^k cos(k i pi / N); T_{N+1} aliases onto T_{N-1} at the nodes
        let mut c: Vec<f64> = (0..=n)
            .map(|k| if k.is_multiple_of(2) { b[k] } else { -b[k] })
            .collect();
        c[n - 1] += if (n + 1).is_multiple_of(2) { b[n + 1] } else { -b[n + 1] };

        let z = self.even_transform(&c);
        let values: Vec<f64> = (0..=n)
            .map(|i| {
                let last = if i % 2 == 0 { c[n] } else { -c[n] };
                0.5 * (z[i] + c[0] + last)
            })
            .collect();

        let pin = match anchor {
            Anchor::Left => values[0],
            Anchor::Right => values[n],
        };
        Ok(values.into_iter().map(|s| s - pin).collect())
    }

    /// Real part of the length-`2N` DFT of the even extension of `x`.
    fn even_transform(&self, x: &[f64]) -> Vec<f64> {
        let n = self.degree;
        let mut buf: Vec<Complex64> = (0..2 * n)
            .map(|m| {
                let idx = if m <= n { m } else { 2 * n - m };
                Complex64::new(x[idx], 0.0)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.iter().take(n + 1).map(|z| z.re).collect()
    }
}
