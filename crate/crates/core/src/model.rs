//! The scalar optimal control problem
//!
//! ```text
//! minimize E(x(-1), x(1))  subject to  x' = f(x, u),  e(x(-1), x(1)) = 0
//! ```
//!
//! together with its Pontryagin Hamiltonian `H = lambda f` and endpoint
//! Lagrangian `E + nu e`. Problem authors supply every first and second
//! partial derivative analytically; [`check_derivatives`] validates them
//! against central differences.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{what} evaluated to a non-finite value at ({a}, {b})")]
    NonFinite { what: &'static str, a: f64, b: f64 },
    #[error("unknown problem `{0}` (expected tp1, tp2 or tp3)")]
    UnknownProblem(String),
}

/// Value and partial derivatives up to second order of a smooth `g(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet2 {
    pub value: f64,
    pub d_p: f64,
    pub d_q: f64,
    pub d_pp: f64,
    pub d_pq: f64,
    pub d_qq: f64,
}

impl Jet2 {
    fn is_finite(&self) -> bool {
        [self.value, self.d_p, self.d_q, self.d_pp, self.d_pq, self.d_qq]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// A twice-differentiable function of two reals returning its full jet.
pub type SmoothFn = Arc<dyn Fn(f64, f64) -> Jet2 + Send + Sync>;

/// A scalar function of time.
pub type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form extremal of a problem, including the rates needed to sample
/// the virtual and co-virtual variables.
#[derive(Clone)]
pub struct AnalyticSolution {
    pub state: Curve,
    pub state_rate: Curve,
    pub control: Curve,
    pub costate: Curve,
    pub costate_rate: Curve,
    pub xa: f64,
    pub xb: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub nu: f64,
}

impl fmt::Debug for AnalyticSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticSolution")
            .field("xa", &self.xa)
            .field("xb", &self.xb)
            .field("lambda_a", &self.lambda_a)
            .field("lambda_b", &self.lambda_b)
            .field("nu", &self.nu)
            .finish_non_exhaustive()
    }
}

#[derive(Clone)]
pub struct OcpProblem {
    name: String,
    dynamics: SmoothFn,
    mayer: SmoothFn,
    endpoint: SmoothFn,
    analytic: Option<AnalyticSolution>,
}

impl fmt::Debug for OcpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OcpProblem")
            .field("name", &self.name)
            .field("analytic", &self.analytic)
            .finish_non_exhaustive()
    }
}

impl OcpProblem {
    /// `dynamics` is `f(x, u)`, `mayer` is `E(x^a, x^b)`, `endpoint` is `e(x^a, x^b)`.
    pub fn new(
        name: impl Into<String>,
        dynamics: impl Fn(f64, f64) -> Jet2 + Send + Sync + 'static,
        mayer: impl Fn(f64, f64) -> Jet2 + Send + Sync + 'static,
        endpoint: impl Fn(f64, f64) -> Jet2 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dynamics: Arc::new(dynamics),
            mayer: Arc::new(mayer),
            endpoint: Arc::new(endpoint),
            analytic: None,
        }
    }

    pub fn with_analytic(mut self, solution: AnalyticSolution) -> Self {
        self.analytic = Some(solution);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn analytic(&self) -> Option<&AnalyticSolution> {
        self.analytic.as_ref()
    }

    pub fn dynamics(&self, x: f64, u: f64) -> Jet2 {
        (self.dynamics)(x, u)
    }

    pub fn mayer(&self, xa: f64, xb: f64) -> Jet2 {
        (self.mayer)(xa, xb)
    }

    pub fn endpoint_constraint(&self, xa: f64, xb: f64) -> Jet2 {
        (self.endpoint)(xa, xb)
    }
}

/// Hamiltonian `H = lambda f(x, u)` and its derivatives at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HamiltonianEval {
    pub h: f64,
    pub h_x: f64,
    pub h_u: f64,
    pub h_lambda: f64,
    pub h_xx: f64,
    pub h_xu: f64,
    pub h_uu: f64,
    pub h_lambda_x: f64,
    pub h_lambda_u: f64,
}

pub fn hamiltonian_eval(
    problem: &OcpProblem,
    lambda: f64,
    x: f64,
    u: f64,
) -> Result<HamiltonianEval, ModelError> {
    let f = problem.dynamics(x, u);
    if !f.is_finite() {
        return Err(ModelError::NonFinite {
            what: "dynamics",
            a: x,
            b: u,
        });
    }
    Ok(HamiltonianEval {
        h: lambda * f.value,
        h_x: lambda * f.d_p,
        h_u: lambda * f.d_q,
        h_lambda: f.value,
        h_xx: lambda * f.d_pp,
        h_xu: lambda * f.d_pq,
        h_uu: lambda * f.d_qq,
        h_lambda_x: f.d_p,
        h_lambda_u: f.d_q,
    })
}

/// Endpoint Lagrangian `E + nu e` and its derivatives. `Ebar_nunu` is
/// identically zero and not stored.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EndpointEval {
    pub e_bar: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub e_nu: f64,
    pub e_aa: f64,
    pub e_ab: f64,
    pub e_bb: f64,
    pub e_a_nu: f64,
    pub e_b_nu: f64,
}

pub fn endpoint_eval(
    problem: &OcpProblem,
    nu: f64,
    xa: f64,
    xb: f64,
) -> Result<EndpointEval, ModelError> {
    let cost = problem.mayer(xa, xb);
    if !cost.is_finite() {
        return Err(ModelError::NonFinite {
            what: "endpoint cost",
            a: xa,
            b: xb,
        });
    }
    let con = problem.endpoint_constraint(xa, xb);
    if !con.is_finite() {
        return Err(ModelError::NonFinite {
            what: "endpoint constraint",
            a: xa,
            b: xb,
        });
    }
    Ok(EndpointEval {
        e_bar: cost.value + nu * con.value,
        e_a: cost.d_p + nu * con.d_p,
        e_b: cost.d_q + nu * con.d_q,
        e_nu: con.value,
        e_aa: cost.d_pp + nu * con.d_pp,
        e_ab: cost.d_pq + nu * con.d_pq,
        e_bb: cost.d_qq + nu * con.d_qq,
        e_a_nu: con.d_p,
        e_b_nu: con.d_q,
    })
}

/// Sampling region for [`check_derivatives`]: a tensor lattice over each
/// function's two arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub x: (f64, f64),
    pub u: (f64, f64),
    pub xa: (f64, f64),
    pub xb: (f64, f64),
    pub points_per_axis: usize,
}

impl Default for SampleBox {
    fn default() -> Self {
        Self {
            x: (-1.5, 1.5),
            u: (-1.5, 1.5),
            xa: (-1.5, 1.5),
            xb: (-1.5, 1.5),
            points_per_axis: 4,
        }
    }
}

impl SampleBox {
    fn lattice(&self, p: (f64, f64), q: (f64, f64)) -> Vec<(f64, f64)> {
        // at least 4 x 4 = 16 samples
        let m = self.points_per_axis.max(4);
        let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
            (0..m)
                .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
                .collect()
        };
        let (ps, qs) = (axis(p), axis(q));
        ps.iter()
            .flat_map(|&a| qs.iter().map(move |&b| (a, b)))
            .collect()
    }
}

/// Max relative central-difference error per supplied derivative, keyed by
/// names such as `f_x`, `E_ab`, `e_bb`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub errors: BTreeMap<String, f64>,
}

impl DerivativeReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.errors.get(name).copied()
    }

    pub fn max_error(&self) -> f64 {
        self.errors.values().copied().fold(0.0, f64::max)
    }

    /// Names whose error exceeds `tol`.
    pub fn flagged(&self, tol: f64) -> Vec<&str> {
        self.errors
            .iter()
            .filter(|(_, &e)| e.is_nan() || e > tol)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

/// Compares every authored derivative against central differences of the
/// next-lower derivative, with step `cbrt(eps) * max(1, |arg|)`.
pub fn check_derivatives(problem: &OcpProblem, samples: &SampleBox) -> DerivativeReport {
    let mut report = DerivativeReport::default();
    type Target<'a> = (&'static str, &'a SmoothFn, (f64, f64), (f64, f64));
    let targets: [Target; 3] = [
        ("f", &problem.dynamics, samples.x, samples.u),
        ("E", &problem.mayer, samples.xa, samples.xb),
        ("e", &problem.endpoint, samples.xa, samples.xb),
    ];
    for (prefix, func, p_range, q_range) in targets {
        let (p_name, q_name) = if prefix == "f" { ("x", "u") } else { ("a", "b") };
        let mut worst: BTreeMap<String, f64> = BTreeMap::new();
        for (p, q) in samples.lattice(p_range, q_range) {
            for (label, err) in jet_errors(func.as_ref(), p, q) {
                let name = format!(
                    "{prefix}_{}",
                    label.replace('p', p_name).replace('q', q_name)
                );
                let slot = worst.entry(name).or_insert(0.0);
                // propagate NaN so broken derivatives cannot hide
                if err.is_nan() || err > *slot {
                    *slot = err;
                }
            }
        }
        report.errors.extend(worst);
    }
    report
}

fn jet_errors(g: &(dyn Fn(f64, f64) -> Jet2 + Send + Sync), p: f64, q: f64) -> [(&'static str, f64); 5] {
    let cbrt_eps = f64::EPSILON.cbrt();
    let hp = cbrt_eps * p.abs().max(1.0);
    let hq = cbrt_eps * q.abs().max(1.0);
    let at = g(p, q);
    let (pp, pm) = (g(p + hp, q), g(p - hp, q));
    let (qp, qm) = (g(p, q + hq), g(p, q - hq));
    let rel = |analytic: f64, fd: f64| (analytic - fd).abs() / fd.abs().max(1.0);
    [
        ("p", rel(at.d_p, (pp.value - pm.value) / (2.0 * hp))),
        ("q", rel(at.d_q, (qp.value - qm.value) / (2.0 * hq))),
        ("pp", rel(at.d_pp, (pp.d_p - pm.d_p) / (2.0 * hp))),
        ("pq", rel(at.d_pq, (qp.d_p - qm.d_p) / (2.0 * hq))),
        ("qq", rel(at.d_qq, (qp.d_q - qm.d_q) / (2.0 * hq))),
    ]
}

/// Names accepted by [`builtin_problem`].
pub const BUILTIN_PROBLEMS: [&str; 3] = ["tp1", "tp2", "tp3"];

/// Built-in test problems.
///
/// * `tp1`: `f = -x + u^2`, `E = x^b`, `e = x^a - 1`, with closed-form extremal
///   `x = exp(-(t+1))`, `u = 0`, `lambda = exp(t-1)`.
/// * `tp2`: `f = -x^3 + u^2`, same endpoint data, with extremal
///   `x = (3+2t)^(-1/2)`, `lambda = ((3+2t)/5)^(3/2)`.
/// * `tp3`: `f = -x + x u + u^2/2`, same endpoint data; the state and control
///   are coupled (`f_xu = 1`). No analytic descriptor is attached.
pub fn builtin_problem(name: &str) -> Result<OcpProblem, ModelError> {
    match name.trim().to_ascii_lowercase().as_str() {
        "tp1" => Ok(tp1()),
        "tp2" => Ok(tp2()),
        "tp3" => Ok(tp3()),
        _ => Err(ModelError::UnknownProblem(name.to_string())),
    }
}

fn final_state_cost(_xa: f64, xb: f64) -> Jet2 {
    Jet2 {
        value: xb,
        d_q: 1.0,
        ..Jet2::default()
    }
}

fn unit_initial_state(xa: f64, _xb: f64) -> Jet2 {
    Jet2 {
        value: xa - 1.0,
        d_p: 1.0,
        ..Jet2::default()
    }
}

fn tp1() -> OcpProblem {
    let e2 = (-2.0_f64).exp();
    OcpProblem::new(
        "tp1",
        |x, u| Jet2 {
            value: -x + u * u,
            d_p: -1.0,
            d_q: 2.0 * u,
            d_pp: 0.0,
            d_pq: 0.0,
            d_qq: 2.0,
        },
        final_state_cost,
        unit_initial_state,
    )
    .with_analytic(AnalyticSolution {
        state: Arc::new(|t| (-(t + 1.0)).exp()),
        state_rate: Arc::new(|t| -(-(t + 1.0)).exp()),
        control: Arc::new(|_| 0.0),
        costate: Arc::new(|t| (t - 1.0).exp()),
        costate_rate: Arc::new(|t| (t - 1.0).exp()),
        xa: 1.0,
        xb: e2,
        lambda_a: e2,
        lambda_b: 1.0,
        nu: -e2,
    })
}

fn tp2() -> OcpProblem {
    let s5 = 5.0_f64.sqrt();
    OcpProblem::new(
        "tp2",
        |x, u| Jet2 {
            value: -x * x * x + u * u,
            d_p: -3.0 * x * x,
            d_q: 2.0 * u,
            d_pp: -6.0 * x,
            d_pq: 0.0,
            d_qq: 2.0,
        },
        final_state_cost,
        unit_initial_state,
    )
    .with_analytic(AnalyticSolution {
        state: Arc::new(|t| (3.0 + 2.0 * t).powf(-0.5)),
        state_rate: Arc::new(|t| -(3.0 + 2.0 * t).powf(-1.5)),
        control: Arc::new(|_| 0.0),
        costate: Arc::new(|t| ((3.0 + 2.0 * t) / 5.0).powf(1.5)),
        costate_rate: Arc::new(|t| 0.6 * ((3.0 + 2.0 * t) / 5.0).sqrt()),
        xa: 1.0,
        xb: 1.0 / s5,
        lambda_a: 1.0 / (5.0 * s5),
        lambda_b: 1.0,
        nu: -1.0 / (5.0 * s5),
    })
}

fn tp3() -> OcpProblem {
    OcpProblem::new(
        "tp3",
        |x, u| Jet2 {
            value: -x + x * u + 0.5 * u * u,
            d_p: -1.0 + u,
            d_q: x + u,
            d_pp: 0.0,
            d_pq: 1.0,
            d_qq: 1.0,
        },
        final_state_cost,
        unit_initial_state,
    )
}
