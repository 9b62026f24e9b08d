//! Gershgorin discs and dense spectra of the Birkhoff Hessian.

use nalgebra::linalg::{balancing, Hessenberg};
use nalgebra::{DMatrix, Schur};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::birkhoff::BirkhoffOperators;
use crate::grid::{make_grid, GridError, GridFamily, GridSpec};
use crate::kkt::{assemble, KktError, KktMatrix};
use crate::model::OcpProblem;
use crate::solver::{initial_guess, newton_solve, SolverError, SolverOptions};

/// Largest matrix handed to the dense eigensolver (`N = 128`).
pub const SPECTRUM_CAP: usize = 5 * 129 + 5;

/// Absolute slack on interval endpoints and disc boundaries.
pub const EIG_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("dense spectrum of a {n}x{n} matrix exceeds the cap of {cap}")]
    DenseCap { n: usize, cap: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("Schur iteration did not converge")]
    NoConvergence,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("solve failed at N={n}: {source}")]
    Solve {
        n: usize,
        #[source]
        source: SolverError,
    },
    #[error("Newton did not converge at N={n}")]
    NotConverged { n: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kkt(#[from] KktError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Row,
    Column,
}

/// Gershgorin discs for a group of rows or columns, read off the assembled
/// matrix: centers are diagonal entries, radii off-diagonal abs-sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscFamily {
    pub label: String,
    pub orientation: Orientation,
    pub indices: Vec<usize>,
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
}

impl DiscFamily {
    fn from_matrix(label: &str, orientation: Orientation, a: &DMatrix<f64>, indices: Vec<usize>) -> Self {
        let (centers, radii) = indices
            .iter()
            .map(|&i| {
                let line: Vec<f64> = match orientation {
                    Orientation::Row => a.row(i).iter().copied().collect(),
                    Orientation::Column => a.column(i).iter().copied().collect(),
                };
                let off: f64 = line
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, v)| v.abs())
                    .sum();
                (a[(i, i)], off)
            })
            .unzip();
        Self {
            label: label.to_string(),
            orientation,
            indices,
            centers,
            radii,
        }
    }

    /// Smallest interval holding the real projections of every disc.
    pub fn real_interval(&self) -> (f64, f64) {
        self.centers
            .iter()
            .zip(&self.radii)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (c, r)| {
                (lo.min(c - r), hi.max(c + r))
            })
    }

    fn contains_real_part(&self, re: f64) -> bool {
        self.centers
            .iter()
            .zip(&self.radii)
            .any(|(c, r)| (re - c).abs() <= r + EIG_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// The seven disc groups used in the mesh-independence argument: rows of
/// blocks 1-2, columns of blocks 3-4, rows 6-7, the control rows, rows 8 and
/// 9, and column 10.
pub fn gershgorin_discs(k: &KktMatrix<'_>) -> Result<Vec<DiscFamily>, SpectralError> {
    let a = k.to_dense()?;
    Ok(disc_families(k, &a))
}

fn disc_families(k: &KktMatrix<'_>, a: &DMatrix<f64>) -> Vec<DiscFamily> {
    let l = k.layout();
    let nn = l.n_nodes();
    vec![
        DiscFamily::from_matrix("rows-block-1-2", Orientation::Row, a, (0..2 * nn).collect()),
        DiscFamily::from_matrix("cols-block-3-4", Orientation::Column, a, (2 * nn..4 * nn).collect()),
        DiscFamily::from_matrix("rows-6-7", Orientation::Row, a, vec![l.scalar(0), l.scalar(1)]),
        DiscFamily::from_matrix("row-5-control", Orientation::Row, a, l.u().collect()),
        DiscFamily::from_matrix("row-8", Orientation::Row, a, vec![l.scalar(2)]),
        DiscFamily::from_matrix("row-9", Orientation::Row, a, vec![l.scalar(3)]),
        DiscFamily::from_matrix("col-10", Orientation::Column, a, vec![l.scalar(4)]),
    ]
}

/// All eigenvalues of a real square matrix, sorted by real then imaginary
/// part. Complex eigenvalues come in exact conjugate pairs.
pub fn dense_spectrum(m: &DMatrix<f64>) -> Result<Vec<Eigenvalue>, SpectralError> {
    dense_spectrum_capped(m, SPECTRUM_CAP)
}

pub fn dense_spectrum_capped(m: &DMatrix<f64>, cap: usize) -> Result<Vec<Eigenvalue>, SpectralError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(SpectralError::NotSquare { rows, cols });
    }
    if rows > cap {
        return Err(SpectralError::DenseCap { n: rows, cap });
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    if rows == 0 {
        return Ok(Vec::new());
    }
    let mut out = match Schur::try_new(m.clone(), f64::EPSILON, 100 * rows) {
        Some(schur) => schur
            .complex_eigenvalues()
            .iter()
            .map(|z| Eigenvalue { re: z.re, im: z.im })
            .collect(),
        // nalgebra's Francis iteration has no exceptional shifts and can cycle
        // on the exactly structured skeleton matrices
        None => hessenberg_qr(m.clone()).ok_or(SpectralError::NoConvergence)?,
    };
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Eigenvalues of a general real matrix by balancing, Hessenberg reduction and
/// the double-shift QR iteration with exceptional shifts every 10 sweeps.
fn hessenberg_qr(mut m: DMatrix<f64>) -> Option<Vec<Eigenvalue>> {
    let n = m.nrows();
    balancing::balance_parlett_reinsch(&mut m);
    let mut a = Hessenberg::new(m).unpack_h();
    let mut out = Vec::with_capacity(n);
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    if anorm == 0.0 {
        return Some(vec![Eigenvalue { re: 0.0, im: 0.0 }; n]);
    }
    let mut t = 0.0;
    let mut nn = n as isize - 1;
    while nn >= 0 {
        let e = nn as usize;
        let mut its = 0;
        loop {
            let mut l = e;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() + s == s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[(e, e)];
            if l == e {
                out.push(Eigenvalue { re: x + t, im: 0.0 });
                nn -= 1;
                break;
            }
            let mut y = a[(e - 1, e - 1)];
            let mut w = a[(e, e - 1)] * a[(e - 1, e)];
            if l == e - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    let lo = if z != 0.0 { x - w / z } else { x + z };
                    out.push(Eigenvalue { re: x + z, im: 0.0 });
                    out.push(Eigenvalue { re: lo, im: 0.0 });
                } else {
                    out.push(Eigenvalue { re: x + p, im: z });
                    out.push(Eigenvalue { re: x + p, im: -z });
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                return None;
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for i in 0..=e {
                    a[(i, i)] -= x;
                }
                let s = a[(e, e - 1)].abs() + a[(e - 1, e - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // two consecutive small subdiagonal entries
            let mut mm = e - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(mm, mm)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(mm + 1, mm)] + a[(mm, mm + 1)];
                q = a[(mm + 1, mm + 1)] - z - rr - ss;
                r = a[(mm + 2, mm + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let u = a[(mm, mm - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(mm - 1, mm - 1)].abs() + z.abs() + a[(mm + 1, mm + 1)].abs());
                if u + v == v {
                    break;
                }
                mm -= 1;
            }
            for i in mm + 2..=e {
                a[(i, i - 2)] = 0.0;
                if i != mm + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }

            for k in mm..e {
                if k != mm {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != e - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == mm {
                    if l != mm {
                        a[(k, k - 1)] = -a[(k, k - 1)];
                    }
                } else {
                    a[(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=e {
                    let mut pj = a[(k, j)] + q * a[(k + 1, j)];
                    if k != e - 1 {
                        pj += r * a[(k + 2, j)];
                        a[(k + 2, j)] -= pj * z;
                    }
                    a[(k + 1, j)] -= pj * y;
                    a[(k, j)] -= pj * x;
                }
                for i in l..=e.min(k + 3) {
                    let mut pi = x * a[(i, k)] + y * a[(i, k + 1)];
                    if k != e - 1 {
                        pi += z * a[(i, k + 2)];
                        a[(i, k + 2)] -= pi * r;
                    }
                    a[(i, k + 1)] -= pi * q;
                    a[(i, k)] -= pi;
                }
            }
        }
    }
    Some(out)
}

/// Empirical check of one statement of the eigenvalue-location theorem:
/// how many eigenvalues have real part in `interval` against how many the
/// statement attributes to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementCheck {
    pub statement: u8,
    pub interval: (f64, f64),
    pub observed: usize,
    pub required: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n_nodes: usize,
    pub dim: usize,
    pub eigenvalues: Vec<Eigenvalue>,
    pub spectral_radius: f64,
    pub count_in_minus2_4: usize,
    pub containment_row: bool,
    pub containment_col: bool,
    pub theorem1: Vec<StatementCheck>,
    /// `max_i (|a_ii| + R_i)` over every row disc.
    pub g_bound: f64,
    pub radius_within_bound: bool,
    pub discs: Vec<DiscFamily>,
}

fn count_in(eigs: &[Eigenvalue], lo: f64, hi: f64) -> usize {
    eigs.iter()
        .filter(|z| z.re >= lo - EIG_TOL && z.re <= hi + EIG_TOL)
        .count()
}

fn union_contains(a: &DMatrix<f64>, orientation: Orientation, z: &Eigenvalue) -> bool {
    let n = a.nrows();
    (0..n).any(|i| {
        let off: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| match orientation {
                Orientation::Row => a[(i, j)].abs(),
                Orientation::Column => a[(j, i)].abs(),
            })
            .sum();
        (z.re - a[(i, i)]).hypot(z.im) <= off + EIG_TOL
    })
}

/// Row-wise `max_i (|a_ii| + sum_{j != i} |a_ij|)`, an upper bound on the
/// spectral radius.
pub fn gershgorin_bound(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Computes discs and the full spectrum of `A`, then checks containment in
/// the row- and column-disc unions and the interval counts of each statement.
pub fn verify_theorem1(k: &KktMatrix<'_>) -> Result<SpectrumReport, SpectralError> {
    let a = k.to_dense_capped(SPECTRUM_CAP).map_err(|e| match e {
        KktError::DenseCap { n, cap } => SpectralError::DenseCap { n, cap },
        other => other.into(),
    })?;
    let eigs = dense_spectrum(&a)?;
    let discs = disc_families(k, &a);
    let nn = k.layout().n_nodes();

    let containment_row = eigs.iter().all(|z| union_contains(&a, Orientation::Row, z));
    let containment_col = eigs.iter().all(|z| union_contains(&a, Orientation::Column, z));
    let spectral_radius = eigs.iter().map(Eigenvalue::abs).fold(0.0, f64::max);
    let g_bound = gershgorin_bound(&a);
    let count = count_in(&eigs, -2.0, 4.0);

    let family = |label: &str| discs.iter().find(|d| d.label == label).expect("fixed family labels");
    let check = |statement: u8, interval: (f64, f64), required: usize| {
        let observed = count_in(&eigs, interval.0, interval.1);
        StatementCheck {
            statement,
            interval,
            observed,
            required,
            pass: observed >= required,
        }
    };
    let control = family("row-5-control");
    let control_hits = eigs.iter().filter(|z| control.contains_real_part(z.re)).count();
    let mut theorem1 = vec![
        check(1, (-2.0, 4.0), 4 * nn + 2),
        check(2, family("col-10").real_interval(), 1),
        check(3, family("row-9").real_interval(), 1),
        check(4, family("row-8").real_interval(), 1),
    ];
    theorem1.push(StatementCheck {
        statement: 5,
        interval: control.real_interval(),
        observed: control_hits,
        required: nn,
        pass: control_hits >= nn,
    });

    Ok(SpectrumReport {
        n_nodes: nn,
        dim: a.nrows(),
        eigenvalues: eigs,
        spectral_radius,
        count_in_minus2_4: count,
        containment_row,
        containment_col,
        theorem1,
        g_bound,
        radius_within_bound: spectral_radius <= g_bound + EIG_TOL,
        discs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub n_nodes: usize,
    /// `None` above the dense-spectrum cap.
    pub spectral_radius: Option<f64>,
    pub g_bound: f64,
}

/// Solves `problem` on each grid, assembles `A` at the solution and records
/// the spectral radius (dense, `N <= 128` only) and the Gershgorin bound.
pub fn spectral_radius_sweep(
    problem: &OcpProblem,
    family: GridFamily,
    ns: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<SweepRow>, SpectralError> {
    ns.iter()
        .map(|&n| {
            let ops = BirkhoffOperators::new(make_grid(GridSpec::new(family, n))?);
            let chi0 = initial_guess(problem, ops.grid());
            let report = newton_solve(problem, &ops, chi0, opts)
                .map_err(|source| SpectralError::Solve { n, source })?;
            if !report.converged {
                return Err(SpectralError::NotConverged { n });
            }
            let k = assemble(&report.chi_star, problem, &ops)?;
            let nn = ops.n_nodes();
            if k.dim() <= SPECTRUM_CAP {
                let a = k.to_dense_capped(SPECTRUM_CAP)?;
                let rho = dense_spectrum(&a)?
                    .iter()
                    .map(Eigenvalue::abs)
                    .fold(0.0, f64::max);
                Ok(SweepRow {
                    n,
                    n_nodes: nn,
                    spectral_radius: Some(rho),
                    g_bound: gershgorin_bound(&a),
                })
            } else {
                Ok(SweepRow {
                    n,
                    n_nodes: nn,
                    spectral_radius: None,
                    g_bound: structured_gershgorin_bound(&k),
                })
            }
        })
        .collect()
}

/// Row abs-sum bound computed from the structural entries, without
/// densifying.
pub fn structured_gershgorin_bound(k: &KktMatrix<'_>) -> f64 {
    let mut sums = vec![0.0; k.dim()];
    k.for_each_entry(|r, _, v| sums[r] += v.abs());
    sums.into_iter().fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amplification {
    pub values: Vec<f64>,
    pub argmax: Vec<usize>,
}

/// Node-wise amplification `delta / w_i` of a uniform weak-form residual
/// `delta` into the pointwise stationarity condition, and the nodes where it
/// is largest (ties within a relative `1e-12`).
pub fn weak_form_amplification(weights: &[f64], delta: f64) -> Result<Amplification, SpectralError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(SpectralError::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    if weights.is_empty() || !weights.iter().all(|w| *w > 0.0 && w.is_finite()) {
        return Err(SpectralError::InvalidInput("weights must be positive".into()));
    }
    let values: Vec<f64> = weights.iter().map(|w| delta / w).collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    let argmax = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= max * (1.0 - 1e-12))
        .map(|(i, _)| i)
        .collect();
    Ok(Amplification { values, argmax })
}

/// Largest column abs-sums of `B^a` and `B^b` on one grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnSumReport {
    pub family: GridFamily,
    pub degree: usize,
    pub ba: f64,
    pub bb: f64,
    pub exceeds_two: bool,
}

pub fn column_sum_report(ops: &BirkhoffOperators) -> ColumnSumReport {
    let (ba, bb) = ops.max_column_abs_sums();
    ColumnSumReport {
        family: ops.grid().family(),
        degree: ops.grid().degree(),
        ba,
        bb,
        exceeds_two: ba > 2.0 || bb > 2.0,
    }
}
