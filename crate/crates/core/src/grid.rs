//! Chebyshev- and Legendre-Gauss-Lobatto grids on `[-1, 1]`.
//!
//! Both families include the endpoints `tau = -1` and `tau = +1`, so the first
//! and last grid values coincide with the boundary state. Nodes are stored in
//! increasing order.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::legendre_pair;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("polynomial degree must be at least 2, got {0}")]
    InvalidDegree(usize),
    #[error("Legendre-Lobatto node {index} did not converge for degree {degree}")]
    NoConvergence { degree: usize, index: usize },
    #[error("unknown grid family `{0}` (expected `cgl` or `lgl`)")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridFamily {
    #[serde(rename = "cgl")]
    ChebyshevLobatto,
    #[serde(rename = "lgl")]
    LegendreLobatto,
}

impl GridFamily {
    pub fn short_name(self) -> &'static str {
        match self {
            GridFamily::ChebyshevLobatto => "cgl",
            GridFamily::LegendreLobatto => "lgl",
        }
    }
}

impl fmt::Display for GridFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for GridFamily {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cgl" | "chebyshev" | "chebyshev-lobatto" => Ok(GridFamily::ChebyshevLobatto),
            "lgl" | "legendre" | "legendre-lobatto" => Ok(GridFamily::LegendreLobatto),
            _ => Err(GridError::UnknownFamily(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub family: GridFamily,
    /// Polynomial degree `N`; the grid has `N + 1` nodes.
    pub degree: usize,
}

impl GridSpec {
    pub fn new(family: GridFamily, degree: usize) -> Self {
        Self { family, degree }
    }

    pub fn chebyshev(degree: usize) -> Self {
        Self::new(GridFamily::ChebyshevLobatto, degree)
    }

    pub fn legendre(degree: usize) -> Self {
        Self::new(GridFamily::LegendreLobatto, degree)
    }
}

/// Lobatto nodes and their quadrature weights. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    spec: GridSpec,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn family(&self) -> GridFamily {
        self.spec.family
    }

    /// Polynomial degree `N`.
    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    /// Number of nodes `N + 1`.
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Builds the grid described by `spec`.
///
/// Chebyshev nodes are `-cos(i pi / N)` with Clenshaw-Curtis weights.
/// Legendre nodes are the endpoints plus the roots of `P_N'`, found by Newton
/// iteration on `(1 - t^2) P_N'(t)` from Chebyshev starting points, with
/// weights `2 / (N (N + 1) P_N(t_i)^2)`.
pub fn make_grid(spec: GridSpec) -> Result<Grid, GridError> {
    if spec.degree < 2 {
        return Err(GridError::InvalidDegree(spec.degree));
    }
    let (nodes, weights) = match spec.family {
        GridFamily::ChebyshevLobatto => chebyshev_lobatto(spec.degree),
        GridFamily::LegendreLobatto => legendre_lobatto(spec.degree)?,
    };
    Ok(Grid {
        spec,
        nodes,
        weights,
    })
}

fn chebyshev_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    // sin form of -cos(i pi / N) is exactly antisymmetric in i <-> N - i
    let nodes = (0..=n)
        .map(|i| (PI * (2.0 * i as f64 - nf) / (2.0 * nf)).sin())
        .collect();
    (nodes, clenshaw_curtis_weights(n))
}

/// Clenshaw-Curtis weights from the closed-form cosine sum.
fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let end = if n.is_multiple_of(2) {
        1.0 / (nf * nf - 1.0)
    } else {
        1.0 / (nf * nf)
    };
    w[0] = end;
    w[n] = end;
    for (i, wi) in w.iter_mut().enumerate().take(n).skip(1) {
        let theta = i as f64 * PI / nf;
        let mut v = 1.0;
        if n.is_multiple_of(2) {
            for k in 1..n / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
            v -= (nf * theta).cos() / (nf * nf - 1.0);
        } else {
            for k in 1..=(n - 1) / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        *wi = 2.0 * v / nf;
    }
    // symmetric by construction up to rounding in cos; make it exact
    for i in 0..=n / 2 {
        let avg = 0.5 * (w[i] + w[n - i]);
        w[i] = avg;
        w[n - i] = avg;
    }
    w
}

fn legendre_lobatto(n: usize) -> Result<(Vec<f64>, Vec<f64>), GridError> {
    let nf = n as f64;
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = -1.0;
    nodes[n] = 1.0;

    // Interior roots come in +/- pairs; solve the lower half and mirror.
    for i in 1..=n / 2 {
        let mut t = -(PI * i as f64 / nf).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, pm1) = legendre_pair(n, t);
            // d/dt[(1-t^2) P_N'] = -N(N+1) P_N and (1-t^2) P_N' = N (P_{N-1} - t P_N)
            let step = (t * p - pm1) / ((nf + 1.0) * p);
            t -= step;
            if step.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(GridError::NoConvergence {
                degree: n,
                index: i,
            });
        }
        nodes[i] = t;
        nodes[n - i] = -t;
    }
    if n.is_multiple_of(2) {
        nodes[n / 2] = 0.0;
    }

    let weights = nodes
        .iter()
        .map(|&t| {
            let (p, _) = legendre_pair(n, t);
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    Ok((nodes, weights))
}

/// Absolute quadrature error on each monomial `t^k`, `k = 0..=d_max`.
pub fn quadrature_exactness_degree(grid: &Grid, d_max: usize) -> Vec<f64> {
    (0..=d_max)
        .map(|k| {
            let exact = if k % 2 == 0 {
                2.0 / (k as f64 + 1.0)
            } else {
                0.0
            };
            let approx: f64 = grid
                .nodes
                .iter()
                .zip(&grid.weights)
                .map(|(&t, &w)| w * t.powi(k as i32))
                .sum();
            (approx - exact).abs()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    /// Independent oracle: solve the moment system `sum_i w_i t_i^k = int t^k`
    /// for `k = 0..N` on fixed nodes.
    fn moment_weights(nodes: &[f64]) -> Vec<f64> {
        let n = nodes.len();
        let v = DMatrix::from_fn(n, n, |k, i| nodes[i].powi(k as i32));
        let m = DVector::from_fn(n, |k, _| if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 });
        v.lu().solve(&m).unwrap().iter().copied().collect()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn cgl_degree_two() {
        let g = make_grid(GridSpec::chebyshev(2)).unwrap();
        assert_close(g.nodes(), &[-1.0, 0.0, 1.0], 1e-15);
        let expected = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        assert_close(&moment_weights(g.nodes()), &expected, 1e-14);
        assert_close(g.weights(), &expected, 1e-15);
    }

    #[test]
    fn lgl_degree_three() {
        let g = make_grid(GridSpec::legendre(3)).unwrap();
        let s = 1.0 / 5f64.sqrt();
        assert_close(g.nodes(), &[-1.0, -s, s, 1.0], 1e-15);
        let expected = [1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0];
        assert_close(&moment_weights(g.nodes()), &expected, 1e-14);
        assert_close(g.weights(), &expected, 1e-15);
    }

    #[test]
    fn cgl_degree_four() {
        let g = make_grid(GridSpec::chebyshev(4)).unwrap();
        let expected = [1.0 / 15.0, 8.0 / 15.0, 4.0 / 5.0, 8.0 / 15.0, 1.0 / 15.0];
        assert_close(&moment_weights(g.nodes()), &expected, 1e-14);
        assert_close(g.weights(), &expected, 1e-15);
    }

    #[test]
    fn weights_match_moment_oracle_for_small_degrees() {
        for family in [GridFamily::ChebyshevLobatto, GridFamily::LegendreLobatto] {
            for n in 2..=12 {
                let g = make_grid(GridSpec::new(family, n)).unwrap();
                assert_close(g.weights(), &moment_weights(g.nodes()), 1e-11);
            }
        }
    }

    #[test]
    fn rejects_low_degree() {
        assert_eq!(
            make_grid(GridSpec::chebyshev(1)).unwrap_err(),
            GridError::InvalidDegree(1)
        );
        assert!(make_grid(GridSpec::legendre(0)).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("cgl".parse::<GridFamily>().unwrap(), GridFamily::ChebyshevLobatto);
        assert_eq!("LGL".parse::<GridFamily>().unwrap(), GridFamily::LegendreLobatto);
        assert!("gauss".parse::<GridFamily>().is_err());
    }

    #[test]
    fn exactness_lgl_and_cgl() {
        let lgl = make_grid(GridSpec::legendre(3)).unwrap();
        assert!(quadrature_exactness_degree(&lgl, 5).iter().all(|&e| e <= 1e-13));
        let cgl = make_grid(GridSpec::chebyshev(4)).unwrap();
        assert!(quadrature_exactness_degree(&cgl, 4).iter().all(|&e| e <= 1e-13));
        // odd moments vanish by symmetry
        for g in [&lgl, &cgl] {
            let errs = quadrature_exactness_degree(g, 9);
            for k in (1..=9).step_by(2) {
                assert!(errs[k] <= 1e-15);
            }
        }
    }

    #[test]
    fn lgl_exact_through_2n_minus_1() {
        for n in 2..=64 {
            let g = make_grid(GridSpec::legendre(n)).unwrap();
            let errs = quadrature_exactness_degree(&g, 2 * n - 1);
            assert!(errs.iter().all(|&e| e <= 1e-12), "N={n}: {errs:?}");
        }
    }

    #[test]
    fn structural_invariants() {
        for family in [GridFamily::ChebyshevLobatto, GridFamily::LegendreLobatto] {
            for n in (2..=64).chain([100, 257, 512]) {
                let g = make_grid(GridSpec::new(family, n)).unwrap();
                let (t, w) = (g.nodes(), g.weights());
                assert_eq!(t.len(), n + 1);
                assert_eq!(t[0], -1.0);
                assert_eq!(t[n], 1.0);
                assert!(t.windows(2).all(|p| p[0] < p[1]));
                let sum: f64 = w.iter().sum();
                assert!((sum - 2.0).abs() <= 1e-13, "{family} N={n}: sum {sum}");
                assert!(w.iter().all(|&x| x > 0.0));
                for i in 0..=n {
                    assert!((t[i] + t[n - i]).abs() <= 1e-14);
                    assert_eq!(w[i], w[n - i]);
                }
                let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
                assert_eq!(w[0], min);
                if n > 2 {
                    assert!(w.iter().all(|&x| x < 1.0));
                    let argmin = w
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                        .unwrap()
                        .0;
                    assert!(argmin == 0 || argmin == n);
                }
            }
        }
    }

    #[test]
    fn lgl_newton_converges_at_large_degree() {
        let g = make_grid(GridSpec::legendre(4096)).unwrap();
        let sum: f64 = g.weights().iter().sum();
        assert!((sum - 2.0).abs() < 1e-12);
    }
}
