//! Hammerstein integral equation of the second kind,
//!
//! ```text
//! u(s) = f(s) + λ ∫₀¹ G(s, t) u(t)ⁿ dt,
//! ```
//!
//! with the Green kernel of `-u''` on `[0, 1]`, discretized by a Nyström
//! scheme on a uniform grid.
//!
//! The weights `w_ij ≈ ∫ G(s_i, t) ℓ_j(t) dt` integrate the kernel against a
//! local cubic Lagrange interpolant of the nodal values. Every cell is split
//! at `t = s`, where `G(s, ·)` has its kink, so the kernel is linear on each
//! piece and 3-point Gauss-Legendre integrates it exactly against cubics.
//!
//! Certificates use the continuous bounds for `n = 3`, `f ≡ 1`, starting at
//! `u0 ≡ 1`:
//! `β = |λ|/(8 - 3|λ|)`, `η = L = 6|λ|/(8 - 3|λ|)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certificate::{
    kantorovich_certificate, verify_error_bound, ConvergenceCertificate, ErrorBoundReport, KantorovichInputs,
    DEFAULT_SEQ_LEN,
};
use crate::problem::{solve, Method, NonlinearSystem, SolveTrace};
use crate::{Error, Result};

/// `|λ|` must stay below this for the bound formulas to make sense.
pub const LAMBDA_BOUND_LIMIT: f64 = 8.0 / 3.0;

/// Kantorovich criterion holds for `|λ|` below this.
pub const LAMBDA_CRITERION_LIMIT: f64 = 32.0 / 27.0;

pub const MIN_NODES: usize = 8;

pub const DEFAULT_LAMBDAS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Green kernel on `[0, 1]²`: `t(1 - s)` for `t <= s`, `s(1 - t)` otherwise.
pub fn green_kernel(s: f64, t: f64) -> f64 {
    if t <= s {
        t * (1.0 - s)
    } else {
        s * (1.0 - t)
    }
}

#[derive(Clone)]
pub enum Forcing {
    /// `f ≡ 1`, the case the analytic bounds cover.
    Unit,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Forcing {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Forcing::Unit => 1.0,
            Forcing::Custom(f) => f(s),
        }
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Unit => f.write_str("Unit"),
            Forcing::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HammersteinSpec {
    pub lambda: f64,
    pub power: u32,
    pub nodes: usize,
    pub forcing: Forcing,
}

impl HammersteinSpec {
    /// `n = 3`, `f ≡ 1`.
    pub fn new(lambda: f64, nodes: usize) -> Self {
        Self { lambda, power: 3, nodes, forcing: Forcing::Unit }
    }

    pub fn with_power(mut self, power: u32) -> Self {
        self.power = power;
        self
    }

    pub fn with_forcing(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.forcing = Forcing::Custom(Arc::new(f));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda.abs() < LAMBDA_BOUND_LIMIT) {
            return Err(Error::Invalid(format!("|lambda| must be < 8/3, got {}", self.lambda)));
        }
        if self.power < 2 {
            return Err(Error::Invalid(format!("power must be >= 2, got {}", self.power)));
        }
        if self.nodes < MIN_NODES {
            return Err(Error::Invalid(format!("nodes must be >= {MIN_NODES}, got {}", self.nodes)));
        }
        if let Some(s) = grid(self.nodes).into_iter().find(|&s| !(self.forcing.eval(s) > 0.0)) {
            return Err(Error::Invalid(format!("forcing must be positive, f({s}) = {}", self.forcing.eval(s))));
        }
        Ok(())
    }

    /// Whether the analytic bounds apply (`n = 3`, `f ≡ 1`).
    pub fn has_analytic_bounds(&self) -> bool {
        self.power == 3 && matches!(self.forcing, Forcing::Unit)
    }
}

fn grid(m: usize) -> Vec<f64> {
    (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
}

/// Quadrature weights `w_j` with `Σ_j w_j φ(t_j) ≈ ∫₀¹ G(s, t) φ(t) dt`.
///
/// Exact for cubic `φ`.
pub fn quadrature_row(s: f64, nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    assert!(m >= 4, "need at least four nodes");
    let mut row = vec![0.0; m];
    for c in 0..m - 1 {
        let start = c.saturating_sub(1).min(m - 4);
        let stencil = &nodes[start..start + 4];
        let (a, b) = (nodes[c], nodes[c + 1]);
        let pieces: &[(f64, f64)] = if a < s && s < b { &[(a, s), (s, b)] } else { &[(a, b)] };
        for &(lo, hi) in pieces {
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for &(x, gw) in &GAUSS3 {
                let t = mid + half * x;
                let g = gw * half * green_kernel(s, t);
                for (j, &tj) in stencil.iter().enumerate() {
                    let basis: f64 = stencil
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, &tk)| (t - tk) / (tj - tk))
                        .product();
                    row[start + j] += g * basis;
                }
            }
        }
    }
    row
}

/// Nyström system `F_i(u) = u_i - f(s_i) - λ Σ_j w_ij u_jⁿ`.
#[derive(Debug, Clone)]
pub struct HammersteinSystem {
    pub nodes: Vec<f64>,
    pub weights: DMatrix<f64>,
    pub forcing_values: DVector<f64>,
    pub lambda: f64,
    pub power: u32,
    forcing: Forcing,
}

impl HammersteinSystem {
    /// Starting point `u0 = f` at the nodes.
    pub fn initial_guess(&self) -> DVector<f64> {
        self.forcing_values.clone()
    }

    /// Nyström interpolant `u(s) = f(s) + λ Σ_j w_j(s) u_jⁿ` of a nodal
    /// solution.
    pub fn interpolate(&self, u: &DVector<f64>, s: f64) -> f64 {
        let row = quadrature_row(s, &self.nodes);
        let integral: f64 = row.iter().zip(u.iter()).map(|(w, x)| w * x.powi(self.power as i32)).sum();
        self.forcing.eval(s) + self.lambda * integral
    }

    fn scaled_powers(&self, u: &DVector<f64>, drop: u32) -> DVector<f64> {
        u.map(|x| x.powi((self.power - drop) as i32))
    }
}

impl NonlinearSystem for HammersteinSystem {
    fn dim(&self) -> usize {
        self.nodes.len()
    }

    fn eval(&self, u: &DVector<f64>) -> DVector<f64> {
        u - &self.forcing_values - &self.weights * self.scaled_powers(u, 0) * self.lambda
    }

    fn jacobian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.power as f64;
        let d = self.scaled_powers(u, 1) * (n * self.lambda);
        let mut jac = -&self.weights;
        for (j, mut col) in jac.column_iter_mut().enumerate() {
            col *= d[j];
        }
        for i in 0..self.dim() {
            jac[(i, i)] += 1.0;
        }
        jac
    }

    fn second(&self, u: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let n = self.power as f64;
        let prod = self.scaled_powers(u, 2).component_mul(v).component_mul(w);
        &self.weights * prod * (-n * (n - 1.0) * self.lambda)
    }
}

/// Build the Nyström system on `nodes` uniform points of `[0, 1]`.
pub fn discretize(spec: &HammersteinSpec) -> Result<HammersteinSystem> {
    spec.validate()?;
    let nodes = grid(spec.nodes);
    let m = nodes.len();
    let mut weights = DMatrix::zeros(m, m);
    for (i, &s) in nodes.iter().enumerate() {
        for (j, w) in quadrature_row(s, &nodes).into_iter().enumerate() {
            weights[(i, j)] = w;
        }
    }
    let forcing_values = DVector::from_iterator(m, nodes.iter().map(|&s| spec.forcing.eval(s)));
    Ok(HammersteinSystem {
        nodes,
        weights,
        forcing_values,
        lambda: spec.lambda,
        power: spec.power,
        forcing: spec.forcing.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBounds {
    pub beta: f64,
    pub eta: f64,
    pub lip: f64,
}

impl AnalyticBounds {
    /// `λ = 0` gives `L = 0`, for which no cubic certificate exists.
    pub fn is_degenerate(&self) -> bool {
        self.lip == 0.0
    }

    pub fn kantorovich_inputs(&self) -> KantorovichInputs {
        KantorovichInputs { beta: self.beta, eta: self.eta, lip: self.lip }
    }
}

/// Bounds at `u0 ≡ 1` for `n = 3`, `f ≡ 1` in the max-norm.
pub fn analytic_bounds(lambda: f64) -> Result<AnalyticBounds> {
    let a = lambda.abs();
    if !(a < LAMBDA_BOUND_LIMIT) {
        return Err(Error::Invalid(format!("|lambda| must be < 8/3, got {lambda}")));
    }
    let denom = 8.0 - 3.0 * a;
    Ok(AnalyticBounds { beta: a / denom, eta: 6.0 * a / denom, lip: 6.0 * a / denom })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub lambda: f64,
    pub certified: bool,
    /// Radius of the closed existence ball around `u0 ≡ 1`.
    pub existence: Option<f64>,
    /// Radius of the open uniqueness ball; `None` when unbounded or not
    /// certified.
    pub uniqueness: Option<f64>,
}

/// Existence and uniqueness radii for each `λ`.
///
/// `λ = 0` is the linear case: existence radius 0 and no bound on
/// uniqueness. Values with `|λ| >= 8/3` or a failing criterion give rows
/// marked not certified.
pub fn table1(lambdas: &[f64]) -> Vec<Table1Row> {
    lambdas
        .iter()
        .map(|&lambda| {
            let not_certified = Table1Row { lambda, certified: false, existence: None, uniqueness: None };
            let Ok(bounds) = analytic_bounds(lambda) else {
                return not_certified;
            };
            if bounds.is_degenerate() {
                return Table1Row { lambda, certified: true, existence: Some(0.0), uniqueness: None };
            }
            match kantorovich_certificate(&bounds.kantorovich_inputs(), DEFAULT_SEQ_LEN) {
                Ok(c) if c.is_certified() => Table1Row {
                    lambda,
                    certified: true,
                    existence: c.t_star,
                    uniqueness: c.uniqueness_radius,
                },
                _ => not_certified,
            }
        })
        .collect()
}

/// CSV with header `lambda,existence,uniqueness`, 17 significant digits.
/// Unbounded uniqueness prints `inf`; uncertified cells are empty.
pub fn table1_csv(rows: &[Table1Row]) -> String {
    let num = |v: f64| format!("{v:.16e}");
    let mut out = String::from("lambda,existence,uniqueness\n");
    for r in rows {
        let existence = r.existence.map(num).unwrap_or_default();
        let uniqueness = match (r.certified, r.uniqueness) {
            (_, Some(u)) => num(u),
            (true, None) => "inf".to_string(),
            (false, None) => String::new(),
        };
        out.push_str(&format!("{},{existence},{uniqueness}\n", num(r.lambda)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveCheckReport {
    pub lambda: f64,
    pub nodes: usize,
    pub trace: SolveTrace,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    /// `||u* - u0||_∞`.
    pub distance_from_start: f64,
    pub certificate: Option<ConvergenceCertificate>,
    /// `distance_from_start <= t*`, when a certificate exists.
    pub within_existence_ball: Option<bool>,
    /// A priori error checks, for Halley runs against a certificate.
    pub error_bound: Option<ErrorBoundReport>,
    pub notes: Vec<String>,
}

/// Solve from `u0 = f` with Halley's method and cross-check the certificate.
pub fn solve_and_check(spec: &HammersteinSpec, tol: f64) -> Result<SolveCheckReport> {
    solve_and_check_with(spec, &Method::Halley, tol, 50)
}

pub fn solve_and_check_with(
    spec: &HammersteinSpec,
    method: &Method,
    tol: f64,
    max_iters: usize,
) -> Result<SolveCheckReport> {
    let system = discretize(spec)?;
    let u0 = system.initial_guess();
    let trace = solve(&system, &u0, method, tol, max_iters)?;
    let converged = trace.stop_reason.converged();
    let distance_from_start = (trace.solution() - &u0).amax();

    let mut notes = vec!["uniqueness is only meaningful for the discretized system".to_string()];
    let certificate = if spec.has_analytic_bounds() {
        let bounds = analytic_bounds(spec.lambda)?;
        if bounds.is_degenerate() {
            notes.push("lambda = 0: linear problem, no cubic certificate".into());
            None
        } else {
            Some(kantorovich_certificate(&bounds.kantorovich_inputs(), DEFAULT_SEQ_LEN)?)
        }
    } else {
        notes.push("analytic bounds only cover n = 3 with f = 1".into());
        None
    };

    let t_star = match (&certificate, spec.lambda == 0.0 && spec.has_analytic_bounds()) {
        (Some(c), _) => c.t_star,
        (None, true) => Some(0.0),
        _ => None,
    };
    let within_existence_ball = t_star.map(|t| distance_from_start <= t);

    let error_bound = match (&certificate, method, converged) {
        (Some(c), Method::Halley, true) if c.is_certified() => Some(verify_error_bound(&trace, c)?),
        _ => None,
    };

    Ok(SolveCheckReport {
        lambda: spec.lambda,
        nodes: spec.nodes,
        converged,
        iterations: trace.iterations(),
        final_residual: trace.final_residual(),
        distance_from_start,
        certificate,
        within_existence_ball,
        error_bound,
        notes,
        trace,
    })
}
