use nalgebra::DMatrix;

use crate::birkhoff::BirkhoffOperators;
use crate::kkt::{DecisionVector, KktError};
use crate::model::{endpoint_eval, hamiltonian_eval, OcpProblem};

/// Ordering of the symmetric primal-dual Hessian: primal
/// `y = (X~, V~, U~, x^a, x^b)` followed by dual `psi = (Lambda, Omega, nu, lambda^b)`.
/// There is no `lambda^a` slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AltLayout {
    n_nodes: usize,
}

impl AltLayout {
    pub fn new(n_nodes: usize) -> Self {
        Self { n_nodes }
    }

    /// `5 N_n + 4`.
    pub fn len(&self) -> usize {
        5 * self.n_nodes + 4
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self) -> usize {
        0
    }
    pub fn v(&self) -> usize {
        self.n_nodes
    }
    pub fn u(&self) -> usize {
        2 * self.n_nodes
    }
    pub fn xa(&self) -> usize {
        3 * self.n_nodes
    }
    pub fn xb(&self) -> usize {
        3 * self.n_nodes + 1
    }
    pub fn lambda(&self) -> usize {
        3 * self.n_nodes + 2
    }
    pub fn omega(&self) -> usize {
        4 * self.n_nodes + 2
    }
    pub fn nu(&self) -> usize {
        5 * self.n_nodes + 2
    }
    pub fn lambda_b(&self) -> usize {
        5 * self.n_nodes + 3
    }
}

/// Dense symmetric Hessian of the weighted Lagrangian in the `W_B`-scaled
/// primal variables. The Hamiltonian blocks are evaluated at the same
/// `(X, U, Lambda)` as [`assemble`](super::assemble), and the primal-primal
/// ones carry a `W_B^{-1}` factor.
pub fn assemble_alt(
    chi: &DecisionVector,
    problem: &OcpProblem,
    ops: &BirkhoffOperators,
) -> Result<DMatrix<f64>, KktError> {
    let nn = ops.n_nodes();
    if chi.n_nodes() != nn {
        return Err(KktError::Dimension {
            expected: nn,
            got: chi.n_nodes(),
        });
    }
    let l = AltLayout::new(nn);
    let n = l.len();
    if n > super::DEFAULT_DENSE_CAP {
        return Err(KktError::DenseCap {
            n,
            cap: super::DEFAULT_DENSE_CAP,
        });
    }
    let w = ops.weights();
    let bb = ops.bb();
    let mut a = DMatrix::zeros(n, n);

    for i in 0..nn {
        let h = hamiltonian_eval(problem, chi.lambda()[i], chi.x()[i], chi.u()[i])?;
        let winv = 1.0 / w[i];
        // X~ row
        a[(l.x() + i, l.x() + i)] = winv * h.h_xx;
        a[(l.x() + i, l.u() + i)] = winv * h.h_xu;
        a[(l.x() + i, l.lambda() + i)] = h.h_lambda_x;
        a[(l.x() + i, l.omega() + i)] = 1.0;
        // V~ row
        a[(l.v() + i, l.lambda() + i)] = -1.0;
        for j in 0..nn {
            a[(l.v() + i, l.omega() + j)] = bb[(i, j)];
        }
        a[(l.v() + i, l.lambda_b())] = 1.0;
        // U~ row
        a[(l.u() + i, l.x() + i)] = winv * h.h_xu;
        a[(l.u() + i, l.u() + i)] = winv * h.h_uu;
        a[(l.u() + i, l.lambda() + i)] = h.h_lambda_u;
        // Lambda row
        a[(l.lambda() + i, l.x() + i)] = h.h_lambda_x;
        a[(l.lambda() + i, l.v() + i)] = -1.0;
        a[(l.lambda() + i, l.u() + i)] = h.h_lambda_u;
        // Omega row
        a[(l.omega() + i, l.x() + i)] = 1.0;
        for j in 0..nn {
            a[(l.omega() + i, l.v() + j)] = bb[(j, i)];
        }
        a[(l.omega() + i, l.xa())] = -w[i];
        // lambda^b row
        a[(l.lambda_b(), l.v() + i)] = 1.0;
        // x^a row
        a[(l.xa(), l.omega() + i)] = -w[i];
    }

    let e = endpoint_eval(problem, chi.nu(), chi.xa(), chi.xb())?;
    a[(l.xa(), l.xa())] = e.e_aa;
    a[(l.xa(), l.xb())] = e.e_ab;
    a[(l.xa(), l.nu())] = e.e_a_nu;
    a[(l.xa(), l.lambda_b())] = 1.0;
    a[(l.xb(), l.xa())] = e.e_ab;
    a[(l.xb(), l.xb())] = e.e_bb;
    a[(l.xb(), l.nu())] = e.e_b_nu;
    a[(l.xb(), l.lambda_b())] = -1.0;
    a[(l.nu(), l.xa())] = e.e_a_nu;
    a[(l.nu(), l.xb())] = e.e_b_nu;
    a[(l.lambda_b(), l.xa())] = 1.0;
    a[(l.lambda_b(), l.xb())] = -1.0;
    Ok(a)
}
