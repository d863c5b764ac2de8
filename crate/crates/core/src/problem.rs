//! Finite-dimensional operators and the Halley iteration.
//!
//! An operator is anything implementing [`NonlinearSystem`]: it evaluates
//! `F(x)`, the Jacobian `F'(x)`, and the symmetric bilinear action
//! `F''(x)[u, v]`. The second derivative is never materialised as a tensor.
//!
//! Halley's step is
//!
//! ```text
//! x+ = x - (I - L_F(x))⁻¹ d,   d = F'(x)⁻¹ F(x),
//! L_F(x) v = ½ F'(x)⁻¹ F''(x)[v, d].
//! ```
//!
//! Both `d` and the columns of `L_F` reuse one factorization of `F'(x)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use crate::linalg::NormKind;
use crate::linalg::Factorization;
use crate::{Error, Result};

/// Errors below this multiple of machine epsilon (relative to `max(1, |x*|)`)
/// are excluded from Q-order fits.
const Q_ORDER_NOISE_FACTOR: f64 = 100.0;

/// Number of trailing `(e_k, e_{k+1})` pairs used for the Q-order fit.
const Q_ORDER_WINDOW: usize = 3;

pub trait NonlinearSystem {
    fn dim(&self) -> usize;
    fn eval(&self, x: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64>;
    /// `F''(x)[u, v]`, symmetric and bilinear in `u`, `v`.
    fn second(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64>;

    fn norm_kind(&self) -> NormKind {
        NormKind::Max
    }
}

impl<P: NonlinearSystem + ?Sized> NonlinearSystem for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).eval(x)
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).jacobian(x)
    }
    fn second(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        (**self).second(x, u, v)
    }
    fn norm_kind(&self) -> NormKind {
        (**self).norm_kind()
    }
}

type VecFn = Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type MatFn = Box<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
type BilinFn = Box<dyn Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Operator assembled from closures.
pub struct NonlinearProblem {
    dim: usize,
    eval_f: VecFn,
    eval_jacobian: MatFn,
    eval_second: BilinFn,
    norm_kind: NormKind,
}

impl NonlinearProblem {
    pub fn new<F, J, S>(dim: usize, eval_f: F, eval_jacobian: J, eval_second: S) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        S: Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            eval_f: Box::new(eval_f),
            eval_jacobian: Box::new(eval_jacobian),
            eval_second: Box::new(eval_second),
            norm_kind: NormKind::Max,
        }
    }

    /// Build from per-component Hessians: `F''(x)[u, v]_i = uᵀ H_i(x) v`.
    /// Intended for small `n`.
    pub fn with_dense_hessians<F, J, H>(dim: usize, eval_f: F, eval_jacobian: J, hessians: H) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        H: Fn(&DVector<f64>) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    {
        Self::new(dim, eval_f, eval_jacobian, move |x, u, v| {
            DVector::from_iterator(dim, hessians(x).iter().map(|h| u.dot(&(h * v))))
        })
    }

    pub fn with_norm(mut self, norm_kind: NormKind) -> Self {
        self.norm_kind = norm_kind;
        self
    }
}

impl NonlinearSystem for NonlinearProblem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.eval_f)(x)
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.eval_jacobian)(x)
    }
    fn second(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        (self.eval_second)(x, u, v)
    }
    fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ResidualBelowTol,
    StepBelowTol,
    MaxIters,
    LinearSolveFailure,
    LfNormExceeded,
}

impl StopReason {
    pub fn converged(self) -> bool {
        matches!(self, StopReason::ResidualBelowTol | StopReason::StepBelowTol)
    }
}

/// Record of a solver run.
///
/// `residual_norms` has one entry per iterate; `step_norms` and `lf_norms`
/// one entry per step taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub iterates: Vec<Vec<f64>>,
    pub residual_norms: Vec<f64>,
    pub step_norms: Vec<f64>,
    pub lf_norms: Vec<f64>,
    pub stop_reason: StopReason,
    pub q_order_estimate: Option<f64>,
    pub norm_kind: NormKind,
    /// Failure message when the run ended on an error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn solution(&self) -> DVector<f64> {
        DVector::from_column_slice(self.iterates.last().expect("trace holds x0"))
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual_norms.last().expect("trace holds x0")
    }
}

// Quantities shared by the Halley and family steps at one point.
struct Linearization {
    newton: DVector<f64>,
    lf: DMatrix<f64>,
}

fn linearize<P: NonlinearSystem + ?Sized>(p: &P, x: &DVector<f64>) -> Result<Linearization> {
    let n = p.dim();
    if x.len() != n {
        return Err(Error::Invalid(format!("x has length {}, problem dimension is {n}", x.len())));
    }
    let jac = Factorization::new(p.jacobian(x), "F'(x)")?;
    let newton = jac.solve(&p.eval(x));
    let mut cols = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    for j in 0..n {
        e[j] = 1.0;
        cols.set_column(j, &p.second(x, &e, &newton));
        e[j] = 0.0;
    }
    let lf = jac.solve_matrix(&cols) * 0.5;
    Ok(Linearization { newton, lf })
}

/// Matrix of `L_F(x)`: column `j` is `½ F'(x)⁻¹ F''(x)[e_j, F'(x)⁻¹F(x)]`.
pub fn lf_matrix<P: NonlinearSystem + ?Sized>(p: &P, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    Ok(linearize(p, x)?.lf)
}

/// One Halley step from `x`.
pub fn halley_step<P: NonlinearSystem + ?Sized>(p: &P, x: &DVector<f64>) -> Result<DVector<f64>> {
    let lin = linearize(p, x)?;
    halley_update(x, &lin)
}

fn halley_update(x: &DVector<f64>, lin: &Linearization) -> Result<DVector<f64>> {
    let n = x.len();
    let shifted = DMatrix::identity(n, n) - &lin.lf;
    let step = Factorization::new(shifted, "I - L_F(x)")?.solve(&lin.newton);
    Ok(x - step)
}

/// Check the series coefficients: `a_0 = 1`, `a_1 = 1/2`, then nonnegative
/// and nonincreasing.
pub fn validate_coeffs(coeffs: &[f64]) -> Result<()> {
    let bad = |msg: String| Err(Error::Invalid(msg));
    match coeffs {
        [] => bad("at least one coefficient is required".into()),
        [a0, ..] if *a0 != 1.0 => bad(format!("a_0 must be 1, got {a0}")),
        [_, a1, ..] if *a1 != 0.5 => bad(format!("a_1 must be 1/2, got {a1}")),
        _ => {
            if let Some(k) = coeffs.iter().position(|a| !(a.is_finite() && *a >= 0.0)) {
                return bad(format!("a_{k} = {} is not a finite nonnegative number", coeffs[k]));
            }
            if let Some(k) = (2..coeffs.len()).find(|&k| k >= 3 && coeffs[k] > coeffs[k - 1]) {
                return bad(format!("a_{k} = {} exceeds a_{} = {}", coeffs[k], k - 1, coeffs[k - 1]));
            }
            Ok(())
        }
    }
}

/// One step of the family `x+ = x - (Σ a_k T(x)^k) F'(x)⁻¹F(x)`.
///
/// The series runs in the unhalved operator
/// `T(x) = F'(x)⁻¹F''(x)[·, F'(x)⁻¹F(x)] = 2 L_F(x)`, so `[1]` is Newton,
/// `[1, 1/2]` Chebyshev, and `a_k = 2^{-k}` sums to Halley's `(I - L_F)⁻¹`.
/// Requires `||T(x)|| <= 1/2`; evaluated by Horner's rule on `T(x) d`.
pub fn family_step<P: NonlinearSystem + ?Sized>(
    p: &P,
    x: &DVector<f64>,
    coeffs: &[f64],
) -> Result<DVector<f64>> {
    validate_coeffs(coeffs)?;
    let lin = linearize(p, x)?;
    family_update(x, &lin, coeffs, p.norm_kind())
}

fn family_update(
    x: &DVector<f64>,
    lin: &Linearization,
    coeffs: &[f64],
    norm: NormKind,
) -> Result<DVector<f64>> {
    let series_op = &lin.lf * 2.0;
    let op_norm = norm.matrix(&series_op);
    if op_norm > 0.5 {
        return Err(Error::LfNormExceeded { norm: op_norm });
    }
    let (last, rest) = coeffs.split_last().expect("validated non-empty");
    let step = rest
        .iter()
        .rev()
        .fold(&lin.newton * *last, |acc, a| &lin.newton * *a + &series_op * acc);
    Ok(x - step)
}

/// Iteration scheme for [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Halley,
    Family(Vec<f64>),
}

impl Method {
    pub fn newton() -> Self {
        Method::Family(vec![1.0])
    }

    pub fn chebyshev() -> Self {
        Method::Family(vec![1.0, 0.5])
    }
}

/// Run Halley's method from `x0`.
pub fn halley_solve<P: NonlinearSystem + ?Sized>(
    p: &P,
    x0: &DVector<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<SolveTrace> {
    solve(p, x0, &Method::Halley, tol, max_iters)
}

/// Run `method` from `x0`.
///
/// Stops when `||F(x_k)|| <= tol`, when `||x_{k+1} - x_k|| <= tol`, after
/// `max_iters` steps, or when a step fails. Step failures end the trace with
/// the matching [`StopReason`] rather than an error; only invalid arguments
/// are returned as `Err`.
pub fn solve<P: NonlinearSystem + ?Sized>(
    p: &P,
    x0: &DVector<f64>,
    method: &Method,
    tol: f64,
    max_iters: usize,
) -> Result<SolveTrace> {
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tol must be > 0, got {tol}")));
    }
    if x0.len() != p.dim() {
        return Err(Error::Invalid(format!(
            "x0 has length {}, problem dimension is {}",
            x0.len(),
            p.dim()
        )));
    }
    if let Method::Family(c) = method {
        validate_coeffs(c)?;
    }
    let norm = p.norm_kind();
    let mut x = x0.clone();
    let mut trace = SolveTrace {
        iterates: vec![x.as_slice().to_vec()],
        residual_norms: vec![norm.vector(&p.eval(&x))],
        step_norms: Vec::new(),
        lf_norms: Vec::new(),
        stop_reason: StopReason::MaxIters,
        q_order_estimate: None,
        norm_kind: norm,
        failure: None,
    };

    for k in 0.. {
        if trace.residual_norms[k] <= tol {
            trace.stop_reason = StopReason::ResidualBelowTol;
            break;
        }
        if k == max_iters {
            trace.stop_reason = StopReason::MaxIters;
            break;
        }
        let next = linearize(p, &x)
            .and_then(|lin| {
                trace.lf_norms.push(norm.matrix(&lin.lf));
                match method {
                    Method::Halley => halley_update(&x, &lin),
                    Method::Family(c) => family_update(&x, &lin, c, norm),
                }
            })
            .and_then(|v| {
                if v.iter().all(|c| c.is_finite()) {
                    Ok(v)
                } else {
                    Err(Error::LinearSolve("step produced non-finite values".into()))
                }
            });
        let next = match next {
            Ok(v) => v,
            Err(e) => {
                fail(&mut trace, e);
                break;
            }
        };
        let step = norm.vector(&(&next - &x));
        x = next;
        trace.iterates.push(x.as_slice().to_vec());
        trace.residual_norms.push(norm.vector(&p.eval(&x)));
        trace.step_norms.push(step);
        if step <= tol && trace.residual_norms[k + 1] > tol {
            trace.stop_reason = StopReason::StepBelowTol;
            break;
        }
    }
    trace.q_order_estimate = estimate_q_order(&trace);
    Ok(trace)
}

fn fail(trace: &mut SolveTrace, e: Error) {
    trace.stop_reason = match e {
        Error::LfNormExceeded { .. } => StopReason::LfNormExceeded,
        _ => StopReason::LinearSolveFailure,
    };
    trace.failure = Some(e.to_string());
}

/// Empirical Q-order from a trace, taking its final iterate as `x*`.
///
/// Least-squares slope of `log e_{k+1}` against `log e_k` over the last
/// usable pairs, where `e_k = ||x_k - x*||` must exceed the noise floor.
/// Needs at least four iterates and two usable pairs.
pub fn estimate_q_order(trace: &SolveTrace) -> Option<f64> {
    if trace.iterates.len() < 4 {
        return None;
    }
    let x_star = trace.solution();
    let floor = Q_ORDER_NOISE_FACTOR * f64::EPSILON * trace.norm_kind.vector(&x_star).max(1.0);
    let errors: Vec<f64> = trace.iterates[..trace.iterates.len() - 1]
        .iter()
        .map(|x| trace.norm_kind.vector(&(DVector::from_column_slice(x) - &x_star)))
        .collect();
    let pairs: Vec<(f64, f64)> = errors
        .windows(2)
        .filter(|w| w[0] > floor && w[1] > floor)
        .map(|w| (w[0].ln(), w[1].ln()))
        .collect();
    let window = &pairs[pairs.len().saturating_sub(Q_ORDER_WINDOW)..];
    if window.len() < 2 {
        return None;
    }
    let n = window.len() as f64;
    let mx = window.iter().map(|p| p.0).sum::<f64>() / n;
    let my = window.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = window.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = window.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
