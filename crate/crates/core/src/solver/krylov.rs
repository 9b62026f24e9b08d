use thiserror::Error;

use crate::kkt::{KktError, KktMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KrylovError {
    #[error("GMRES stopped after {iterations} iterations at relative residual {achieved:e}")]
    NoConvergence { iterations: usize, achieved: f64 },
    #[error("restart length must be at least 1")]
    InvalidRestart,
    #[error(transparent)]
    Kkt(#[from] KktError),
}

/// Outcome of a converged Krylov solve.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Restarted GMRES on `A xi = rhs` using only [`KktMatrix::matvec`], stopping
/// once `||A xi - rhs||_2 <= tol ||rhs||_2`. Unpreconditioned, zero initial
/// guess, at most `max(20 n, 1000)` inner iterations in total.
pub fn krylov_linear_solve(
    k: &KktMatrix<'_>,
    rhs: &[f64],
    tol: f64,
    restart: usize,
) -> Result<KrylovSolution, KrylovError> {
    let n = k.dim();
    if rhs.len() != n {
        return Err(KktError::Dimension {
            expected: n,
            got: rhs.len(),
        }
        .into());
    }
    gmres(|v| k.matvec(v).map_err(KrylovError::from), rhs, tol, restart, (20 * n).max(1000))
}

pub(crate) fn gmres(
    apply: impl Fn(&[f64]) -> Result<Vec<f64>, KrylovError>,
    rhs: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<KrylovSolution, KrylovError> {
    if restart == 0 {
        return Err(KrylovError::InvalidRestart);
    }
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok(KrylovSolution {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let m = restart.min(n);
    let mut total = 0;
    while total < max_iter {
        let ax = apply(&x)?;
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= tol {
            return Ok(KrylovSolution {
                x,
                iterations: total,
                relative_residual: rel,
            });
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // column-major upper Hessenberg, already rotated
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;

        let mut j = 0;
        while j < m && total < max_iter {
            let mut w = apply(&basis[j])?;
            let mut col = vec![0.0; j + 2];
            // modified Gram-Schmidt
            for (i, q) in basis.iter().enumerate() {
                let hij = dot(&w, q);
                col[i] = hij;
                for (wk, qk) in w.iter_mut().zip(q) {
                    *wk -= hij * qk;
                }
            }
            let wnorm = norm(&w);
            col[j + 1] = wnorm;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            cs.push(c);
            sn.push(s);
            h.push(col);
            total += 1;
            j += 1;
            if g[j].abs() <= tol * bnorm || wnorm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wnorm).collect());
        }

        // back substitution on the j x j triangle
        let mut y = vec![0.0; j];
        for i in (0..j).rev() {
            let mut acc = g[i];
            for (l, yl) in y.iter().enumerate().skip(i + 1) {
                acc -= h[l][i] * yl;
            }
            y[i] = acc / h[i][i];
        }
        for (yi, q) in y.iter().zip(&basis) {
            for (xk, qk) in x.iter_mut().zip(q) {
                *xk += yi * qk;
            }
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(KrylovError::NoConvergence {
                iterations: total,
                achieved: f64::NAN,
            });
        }
    }
    let ax = apply(&x)?;
    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let achieved = norm(&r) / bnorm;
    if achieved <= tol {
        return Ok(KrylovSolution {
            x,
            iterations: total,
            relative_residual: achieved,
        });
    }
    Err(KrylovError::NoConvergence {
        iterations: total,
        achieved,
    })
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
