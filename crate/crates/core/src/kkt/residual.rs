use crate::birkhoff::BirkhoffOperators;
use crate::kkt::{DecisionVector, KktError};
use crate::model::{endpoint_eval, hamiltonian_eval, OcpProblem};

/// Stacked first-order system `F(chi) = [F_1; ...; F_10]`:
///
/// ```text
/// F1  = X - x^a 1 - B^a V          F6  = x^a - x^b + w^T V
/// F2  = Lambda - lambda^b 1 - B^b Omega   F7 = -lambda^a + lambda^b - w^T Omega
/// F3  = V - H_lambda               F8  = -lambda^b + Ebar_b
/// F4  = Omega + H_x                F9  = Ebar_nu
/// F5  = H_u                        F10 = lambda^a + Ebar_a
/// ```
pub fn residual(
    chi: &DecisionVector,
    problem: &OcpProblem,
    ops: &BirkhoffOperators,
) -> Result<Vec<f64>, KktError> {
    let nn = ops.n_nodes();
    if chi.n_nodes() != nn {
        return Err(KktError::Dimension {
            expected: nn,
            got: chi.n_nodes(),
        });
    }
    let layout = chi.layout();
    let w = ops.weights();
    let mut f = vec![0.0; layout.len()];

    let ba_v = ops.apply_ba(chi.v());
    let bb_omega = ops.apply_bb(chi.omega());
    let (xa, lambda_b, xb, nu, lambda_a) =
        (chi.xa(), chi.lambda_b(), chi.xb(), chi.nu(), chi.lambda_a());

    for i in 0..nn {
        let (x, lam, v, om, u) = (
            chi.x()[i],
            chi.lambda()[i],
            chi.v()[i],
            chi.omega()[i],
            chi.u()[i],
        );
        let h = hamiltonian_eval(problem, lam, x, u)?;
        f[i] = x - xa - ba_v[i];
        f[nn + i] = lam - lambda_b - bb_omega[i];
        f[2 * nn + i] = v - h.h_lambda;
        f[3 * nn + i] = om + h.h_x;
        f[4 * nn + i] = h.h_u;
    }

    let wv: f64 = w.iter().zip(chi.v()).map(|(a, b)| a * b).sum();
    let womega: f64 = w.iter().zip(chi.omega()).map(|(a, b)| a * b).sum();
    let e = endpoint_eval(problem, nu, xa, xb)?;
    f[layout.scalar(0)] = xa - xb + wv;
    f[layout.scalar(1)] = -lambda_a + lambda_b - womega;
    f[layout.scalar(2)] = -lambda_b + e.e_b;
    f[layout.scalar(3)] = e.e_nu;
    f[layout.scalar(4)] = lambda_a + e.e_a;
    Ok(f)
}
