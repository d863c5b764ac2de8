//! Semilocal convergence certificates.
//!
//! A certificate turns bounds measured at the starting point into guarantees
//! for Halley's method: the iterates stay in the closed ball of radius `t*`
//! around `x0` and converge to a zero that is unique in the open ball of
//! radius `t**`. The a priori bound `||x* - x_k|| <= t* - t_k` comes from the
//! majorizing sequence, and the Q-cubic constant bounds
//! `||x* - x_{k+1}|| / ||x* - x_k||³`.
//!
//! Two majorant families are supported:
//!
//! * Kantorovich-type, from `||F'(x0)⁻¹F(x0)|| <= β`,
//!   `||F'(x0)⁻¹F''(x0)|| <= η` and a Lipschitz constant `L` of
//!   `F'(x0)⁻¹F''`: certified iff `β < b(η, L)`.
//! * Smale-type, from `β` and `γ`: certified iff `α = βγ < 3 - 2√2`.
//!
//! Neither `L` nor `γ` is estimated here; both must come from analysis of the
//! operator. [`check_initial_conditions`] can only sample lower bounds for
//! the second-derivative norm.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{Factorization, NormKind};
use crate::majorant::{self, CubicMajorant, Majorant, SmaleMajorant};
use crate::problem::{NonlinearSystem, SolveTrace};
use crate::{Error, Result};

pub const DEFAULT_SEQ_LEN: usize = 10;

/// Multiplicative slack on the a priori error checks.
pub const ERROR_BOUND_SLACK: f64 = 1e-8;

/// Errors at or below this multiple of `eps * max(1, ||x*||)` count as zero.
const NOISE_FLOOR_FACTOR: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KantorovichInputs {
    pub beta: f64,
    pub eta: f64,
    pub lip: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmaleInputs {
    pub beta: f64,
    pub gamma: f64,
}

impl SmaleInputs {
    pub fn alpha(&self) -> f64 {
        self.beta * self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MajorantKind {
    Kantorovich,
    Smale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    CriterionFailed,
}

/// `lhs < rhs` is the convergence criterion; `margin = (rhs - lhs) / rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl Criterion {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, margin: (rhs - lhs) / rhs }
    }

    pub fn holds(&self) -> bool {
        self.lhs < self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCertificate {
    pub kind: MajorantKind,
    pub verdict: Verdict,
    pub criterion: Criterion,
    pub t_star: Option<f64>,
    pub uniqueness_radius: Option<f64>,
    pub rate_constant: Option<f64>,
    /// Majorizing sequence prefix `t_0 = 0, t_1, ...`.
    pub sequence: Vec<f64>,
    /// `t* - t_k` for each sequence point.
    pub apriori_errors: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConvergenceCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    fn failed(kind: MajorantKind, criterion: Criterion) -> Self {
        Self {
            kind,
            verdict: Verdict::CriterionFailed,
            criterion,
            t_star: None,
            uniqueness_radius: None,
            rate_constant: None,
            sequence: Vec::new(),
            apriori_errors: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn certified<M: Majorant>(
        kind: MajorantKind,
        criterion: Criterion,
        h: &M,
        rate: impl Fn(f64) -> f64,
        seq_len: usize,
    ) -> Result<Self> {
        let t_star = majorant::smallest_root(h)?;
        let rho = majorant::uniqueness_radius(h)?.rho;
        let seq = majorant::iterate_sequence(h, t_star, seq_len - 1, 0.0);
        let mut notes = Vec::new();
        if h.value(0.0) == 0.0 {
            notes.push("beta = 0: x0 already solves F(x) = 0; outside the theorem hypotheses".into());
        }
        Ok(Self {
            kind,
            verdict: Verdict::Certified,
            criterion,
            t_star: Some(t_star),
            uniqueness_radius: Some(rho),
            rate_constant: Some(rate(t_star)),
            apriori_errors: seq.gaps,
            sequence: seq.points,
            notes,
        })
    }
}

fn check_seq_len(seq_len: usize) -> Result<()> {
    if seq_len == 0 {
        return Err(Error::Invalid("seq_len must be >= 1".into()));
    }
    Ok(())
}

/// Certificate from the cubic majorant `β - t + (η/2)t² + (L/6)t³`.
pub fn kantorovich_certificate(inputs: &KantorovichInputs, seq_len: usize) -> Result<ConvergenceCertificate> {
    check_seq_len(seq_len)?;
    let h = CubicMajorant::new(inputs.beta, inputs.eta, inputs.lip)?;
    let criterion = Criterion::new(inputs.beta, h.criterion_bound());
    if !criterion.holds() {
        return Ok(ConvergenceCertificate::failed(MajorantKind::Kantorovich, criterion));
    }
    ConvergenceCertificate::certified(
        MajorantKind::Kantorovich,
        criterion,
        &h,
        |t| h.rate_constant(t),
        seq_len,
    )
}

/// Certificate from the rational majorant `β - t + γt²/(1 - γt)`.
pub fn smale_certificate(inputs: &SmaleInputs, seq_len: usize) -> Result<ConvergenceCertificate> {
    check_seq_len(seq_len)?;
    let h = SmaleMajorant::new(inputs.beta, inputs.gamma)?;
    let criterion = Criterion::new(h.alpha(), SmaleMajorant::criterion_bound());
    if !criterion.holds() {
        return Ok(ConvergenceCertificate::failed(MajorantKind::Smale, criterion));
    }
    ConvergenceCertificate::certified(MajorantKind::Smale, criterion, &h, |t| h.rate_constant(t), seq_len)
}

/// Comparison of the starting point against `h(0)` and `h''(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditionReport {
    /// `||F'(x0)⁻¹F(x0)||`.
    pub newton_step_norm: f64,
    pub h0: f64,
    pub newton_step_holds: bool,
    /// Largest `||F'(x0)⁻¹F''(x0)[u, v]||` over the probes: a lower bound on
    /// the operator norm.
    pub second_derivative_norm: f64,
    pub h2_0: f64,
    pub second_derivative_holds: bool,
    pub second_derivative_is_sampled_lower_bound: bool,
    pub probes: usize,
}

impl InitialConditionReport {
    pub fn holds(&self) -> bool {
        self.newton_step_holds && self.second_derivative_holds
    }
}

/// Compare `||F'(x0)⁻¹F(x0)||` with `h(0)` and a sampled estimate of
/// `||F'(x0)⁻¹F''(x0)||` with `h''(0)`.
///
/// The bilinear norm is probed with unit sign patterns (all ones against
/// single flips) plus seeded random sign pairs, `2n` probes in total, each
/// scaled to unit norm.
pub fn check_initial_conditions<P, M>(p: &P, x0: &DVector<f64>, h: &M) -> Result<InitialConditionReport>
where
    P: NonlinearSystem + ?Sized,
    M: Majorant + ?Sized,
{
    let n = p.dim();
    if x0.len() != n {
        return Err(Error::Invalid(format!("x0 has length {}, problem dimension is {n}", x0.len())));
    }
    let norm = p.norm_kind();
    let jac = Factorization::new(p.jacobian(x0), "F'(x0)")?;
    let newton_step_norm = norm.vector(&jac.solve(&p.eval(x0)));

    let unit = |v: DVector<f64>| match norm {
        NormKind::Max => v,
        NormKind::Euclidean => {
            let s = v.norm();
            v / s
        }
    };
    let ones = DVector::from_element(n, 1.0);
    let mut probes: Vec<(DVector<f64>, DVector<f64>)> = (0..n)
        .map(|j| {
            let mut v = ones.clone();
            if j > 0 {
                v[j] = -1.0;
            }
            (unit(ones.clone()), unit(v))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_4a11);
    let mut sign = || DVector::from_fn(n, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
    for _ in 0..n {
        let (u, v) = (sign(), sign());
        probes.push((unit(u), unit(v)));
    }

    let mut actions = DMatrix::zeros(n, probes.len());
    for (j, (u, v)) in probes.iter().enumerate() {
        actions.set_column(j, &p.second(x0, u, v));
    }
    let mapped = jac.solve_matrix(&actions);
    let second_derivative_norm = mapped
        .column_iter()
        .map(|c| norm.vector(&c.into_owned()))
        .fold(0.0, f64::max);

    let h0 = h.value(0.0);
    let h2_0 = h.second(0.0);
    Ok(InitialConditionReport {
        newton_step_norm,
        h0,
        newton_step_holds: newton_step_norm <= h0,
        second_derivative_norm,
        h2_0,
        second_derivative_holds: second_derivative_norm <= h2_0,
        second_derivative_is_sampled_lower_bound: true,
        probes: probes.len(),
    })
}

/// One row of [`verify_error_bound`], for iterate `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundRow {
    pub k: usize,
    /// `||x* - x_k||`.
    pub error: f64,
    /// `t* - t_k`; zero once the majorizing sequence has saturated.
    pub bound: f64,
    pub within_bound: bool,
    /// `(t* - t_{k+1}) (||x* - x_k|| / (t* - t_k))³` for the next iterate.
    pub cubic_bound: Option<f64>,
    pub cubic_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundReport {
    pub rows: Vec<ErrorBoundRow>,
    /// Errors at or below this are treated as zero.
    pub noise_floor: f64,
    /// The first step exceeds `t_1 - t_0`: the certificate's constants do
    /// not dominate this problem.
    pub scale_mismatch: bool,
    pub all_pass: bool,
}

/// Check a converged trace against a certificate's a priori schedule, taking
/// the final iterate as `x*`.
pub fn verify_error_bound(trace: &SolveTrace, cert: &ConvergenceCertificate) -> Result<ErrorBoundReport> {
    if !cert.is_certified() {
        return Err(Error::Invalid("certificate is not certified".into()));
    }
    if !trace.stop_reason.converged() {
        return Err(Error::Invalid(format!("trace did not converge ({:?})", trace.stop_reason)));
    }
    let norm = trace.norm_kind;
    let x_star = trace.solution();
    let noise_floor = NOISE_FLOOR_FACTOR * f64::EPSILON * norm.vector(&x_star).max(1.0);
    let errors: Vec<f64> = trace
        .iterates
        .iter()
        .map(|x| norm.vector(&(DVector::from_column_slice(x) - &x_star)))
        .collect();
    let bound_at = |k: usize| cert.apriori_errors.get(k).copied().unwrap_or(0.0);
    let slack = 1.0 + ERROR_BOUND_SLACK;

    let rows: Vec<ErrorBoundRow> = errors
        .iter()
        .enumerate()
        .map(|(k, &error)| {
            let bound = bound_at(k);
            let within_bound = error <= bound * slack || error <= noise_floor;
            let (cubic_bound, cubic_holds) = match errors.get(k + 1) {
                None => (None, true),
                Some(&next) => {
                    let rhs = (bound > 0.0).then(|| bound_at(k + 1) * (error / bound).powi(3));
                    let holds = next <= noise_floor || rhs.is_some_and(|r| next <= r * slack);
                    (rhs, holds)
                }
            };
            ErrorBoundRow { k, error, bound, within_bound, cubic_bound, cubic_holds }
        })
        .collect();

    let scale_mismatch = match (trace.step_norms.first(), cert.sequence.get(1)) {
        (Some(&step), Some(&t1)) => step > t1 * slack,
        (Some(&step), None) => step > noise_floor,
        _ => false,
    };
    let all_pass = !scale_mismatch && rows.iter().all(|r| r.within_bound && r.cubic_holds);
    Ok(ErrorBoundReport { rows, noise_floor, scale_mismatch, all_pass })
}
