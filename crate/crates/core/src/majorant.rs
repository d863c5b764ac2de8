//! Scalar majorizing functions.
//!
//! A majorizing function `h: [0, R) -> R` dominates the behaviour of the
//! operator iteration: Halley's method applied to `h` from `t = 0` produces a
//! sequence `t_k` whose increments bound the steps `||x_{k+1} - x_k||`, and
//! whose smallest zero `t*` bounds the distance from `x_0` to the solution.
//!
//! The machinery here only needs `h`, `h'` and `h''`. Concrete families may
//! also provide `h'''` and closed-form roots, which are used in preference to
//! the generic numerical paths.
//!
//! Assumptions checked by [`check_assumptions`]:
//!
//! * **A1** `h(0) > 0`, `h''(0) > 0`, `h'(0) = -1`;
//! * **A2** `h''` is convex and increasing on `[0, R)`;
//! * **A3** `h` has a smallest positive zero `t*` and `h'(t*) < 0`.
//!
//! A3 is stated with `h'(t*) < 0` rather than "some `t > t*` with `h(t) < 0`";
//! the two are equivalent for convex `h`, and the derivative form is what the
//! cubic error constant needs.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance for "zero" in assumption checks.
pub const ZERO_TOL: f64 = 1e-12;

/// Relative residual target for roots of `h`, scaled by `max(1, h(0))`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-14;

/// A scalar majorizing function on `[0, R)`.
pub trait Majorant {
    fn value(&self, t: f64) -> f64;
    fn first(&self, t: f64) -> f64;
    fn second(&self, t: f64) -> f64;

    /// `h'''(t)` when the family is thrice differentiable.
    fn third(&self, _t: f64) -> Option<f64> {
        None
    }

    /// Right end `R` of the domain; `+inf` when unbounded.
    fn domain_bound(&self) -> f64 {
        f64::INFINITY
    }

    /// Left derivative `D⁻h''(t)`.
    ///
    /// Exact when `h'''` is available, otherwise a backward difference with
    /// step `1e-6 * max(1, t)` (forward difference when the step would leave
    /// the domain).
    fn left_second_derivative(&self, t: f64) -> f64 {
        if let Some(v) = self.third(t) {
            return v;
        }
        let step = 1e-6 * t.max(1.0);
        if t - step >= 0.0 {
            (self.second(t) - self.second(t - step)) / step
        } else {
            (self.second(t + step) - self.second(t)) / step
        }
    }

    /// Whether the family supplies closed-form roots. When it does,
    /// [`Majorant::closed_form_root`] returning `None` means no root exists.
    fn has_closed_forms(&self) -> bool {
        false
    }

    /// Closed-form smallest nonnegative zero, if the family has one.
    fn closed_form_root(&self) -> Option<f64> {
        None
    }

    /// Closed-form second positive zero `t**`, if the family has one.
    fn closed_form_second_root(&self) -> Option<f64> {
        None
    }
}

impl<M: Majorant + ?Sized> Majorant for &M {
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
    fn first(&self, t: f64) -> f64 {
        (**self).first(t)
    }
    fn second(&self, t: f64) -> f64 {
        (**self).second(t)
    }
    fn third(&self, t: f64) -> Option<f64> {
        (**self).third(t)
    }
    fn domain_bound(&self) -> f64 {
        (**self).domain_bound()
    }
    fn left_second_derivative(&self, t: f64) -> f64 {
        (**self).left_second_derivative(t)
    }
    fn has_closed_forms(&self) -> bool {
        (**self).has_closed_forms()
    }
    fn closed_form_root(&self) -> Option<f64> {
        (**self).closed_form_root()
    }
    fn closed_form_second_root(&self) -> Option<f64> {
        (**self).closed_form_second_root()
    }
}

/// `h(t) = β - t + (η/2) t² + (L/6) t³` on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicMajorant {
    pub beta: f64,
    pub eta: f64,
    pub lip: f64,
}

impl CubicMajorant {
    pub fn new(beta: f64, eta: f64, lip: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Invalid(format!("beta must be finite and >= 0, got {beta}")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::Invalid(format!("eta must be finite and >= 0, got {eta}")));
        }
        if !(lip > 0.0 && lip.is_finite()) {
            return Err(Error::Invalid(format!("lip must be finite and > 0, got {lip}")));
        }
        Ok(Self { beta, eta, lip })
    }

    /// Positive root of `h'`, where `h` attains its minimum on `[0, ∞)`.
    pub fn derivative_root(&self) -> f64 {
        2.0 / (self.eta + (self.eta * self.eta + 2.0 * self.lip).sqrt())
    }

    /// Criterion threshold `b`; A3 holds exactly when `β < b`.
    pub fn criterion_bound(&self) -> f64 {
        let s = (self.eta * self.eta + 2.0 * self.lip).sqrt();
        2.0 * (self.eta + 2.0 * s) / (3.0 * (self.eta + s).powi(2))
    }

    /// Q-cubic rate constant
    /// `[3(η + L t*)² + 2L q] / (9 q²)` with `q = 1 - η t* - L t*²/2`.
    pub fn rate_constant(&self, t_star: f64) -> f64 {
        let q = 1.0 - self.eta * t_star - 0.5 * self.lip * t_star * t_star;
        (3.0 * (self.eta + self.lip * t_star).powi(2) + 2.0 * self.lip * q) / (9.0 * q * q)
    }

    fn newton_polish(&self, mut t: f64, steps: usize) -> f64 {
        for _ in 0..steps {
            let d = self.first(t);
            if d == 0.0 {
                break;
            }
            let next = t - self.value(t) / d;
            if !next.is_finite() || self.value(next).abs() > self.value(t).abs() {
                break;
            }
            t = next;
        }
        t
    }
}

impl Majorant for CubicMajorant {
    fn value(&self, t: f64) -> f64 {
        self.beta + t * (-1.0 + t * (0.5 * self.eta + t * self.lip / 6.0))
    }

    fn first(&self, t: f64) -> f64 {
        -1.0 + t * (self.eta + 0.5 * self.lip * t)
    }

    fn second(&self, t: f64) -> f64 {
        self.eta + self.lip * t
    }

    fn third(&self, _t: f64) -> Option<f64> {
        Some(self.lip)
    }

    fn has_closed_forms(&self) -> bool {
        true
    }

    fn closed_form_root(&self) -> Option<f64> {
        if self.beta == 0.0 {
            return Some(0.0);
        }
        let r1 = self.derivative_root();
        if self.value(r1) > 0.0 {
            return None;
        }
        // Monic form t³ + a t² + b t + c, then the trigonometric solution of
        // the depressed cubic; all three roots are real when h(r1) <= 0.
        let a = 3.0 * self.eta / self.lip;
        let b = -6.0 / self.lip;
        let c = 6.0 * self.beta / self.lip;
        let p = b - a * a / 3.0;
        let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + c;
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let shift = a / 3.0;
        let t_star = (0..3)
            .map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .filter(|&t| t >= 0.0)
            .fold(f64::INFINITY, f64::min);
        let t_star = if t_star.is_finite() { t_star.min(r1) } else { r1 };
        Some(self.newton_polish(t_star, 3).clamp(0.0, r1))
    }

    fn closed_form_second_root(&self) -> Option<f64> {
        let t_star = self.closed_form_root()?;
        // h(t) = (L/6)(t - t*)(t² + p t + q)
        let p = t_star + 3.0 * self.eta / self.lip;
        let q = p * t_star - 6.0 / self.lip;
        let disc = p * p - 4.0 * q;
        if disc < 0.0 {
            return None;
        }
        let root = if q < 0.0 {
            -2.0 * q / (p + disc.sqrt())
        } else {
            0.5 * (-p + disc.sqrt())
        };
        let r1 = self.derivative_root();
        Some(self.newton_polish(root, 2).max(r1))
    }
}

/// `h(t) = β - t + γt²/(1 - γt)` on `[0, 1/γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmaleMajorant {
    pub beta: f64,
    pub gamma: f64,
}

impl SmaleMajorant {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Invalid(format!("beta must be finite and >= 0, got {beta}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Invalid(format!("gamma must be finite and > 0, got {gamma}")));
        }
        Ok(Self { beta, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.beta * self.gamma
    }

    /// `3 - 2√2`; A3 holds exactly when `α` is below it.
    pub fn criterion_bound() -> f64 {
        3.0 - 2.0 * std::f64::consts::SQRT_2
    }

    // Clamped to zero within rounding of the double root at α = 3 - 2√2.
    fn discriminant(&self) -> f64 {
        let a = self.alpha();
        let d = (1.0 + a).powi(2) - 8.0 * a;
        if d.abs() <= 4.0 * f64::EPSILON * (1.0 + a).powi(2) {
            0.0
        } else {
            d
        }
    }

    /// Q-cubic rate constant `8γ² / (3[2(1 - γt*)² - 1]²)`.
    pub fn rate_constant(&self, t_star: f64) -> f64 {
        let g = self.gamma;
        let w = 2.0 * (1.0 - g * t_star).powi(2) - 1.0;
        8.0 * g * g / (3.0 * w * w)
    }
}

impl Majorant for SmaleMajorant {
    fn value(&self, t: f64) -> f64 {
        let g = self.gamma;
        self.beta - t + g * t * t / (1.0 - g * t)
    }

    fn first(&self, t: f64) -> f64 {
        1.0 / (1.0 - self.gamma * t).powi(2) - 2.0
    }

    fn second(&self, t: f64) -> f64 {
        2.0 * self.gamma / (1.0 - self.gamma * t).powi(3)
    }

    fn third(&self, t: f64) -> Option<f64> {
        Some(6.0 * self.gamma * self.gamma / (1.0 - self.gamma * t).powi(4))
    }

    fn domain_bound(&self) -> f64 {
        1.0 / self.gamma
    }

    fn has_closed_forms(&self) -> bool {
        true
    }

    fn closed_form_root(&self) -> Option<f64> {
        let d = self.discriminant();
        if d < 0.0 {
            return None;
        }
        // (1 + α - √d)/(4γ), rationalized to avoid cancellation for small α.
        Some(2.0 * self.beta / (1.0 + self.alpha() + d.sqrt()))
    }

    fn closed_form_second_root(&self) -> Option<f64> {
        let d = self.discriminant();
        if d < 0.0 {
            return None;
        }
        Some((1.0 + self.alpha() + d.sqrt()) / (4.0 * self.gamma))
    }
}

/// Result of checking A1–A3 on a majorant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub a1_holds: bool,
    pub a2_holds: bool,
    pub a3_holds: bool,
    /// Finite-difference consistency of `h, h', h''` on the sampled grid.
    pub derivatives_consistent: bool,
    pub t_star: Option<f64>,
    pub h_prime_at_t_star: Option<f64>,
    pub diagnostics: Vec<String>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.a1_holds && self.a2_holds && self.a3_holds
    }
}

/// Check A1–A3 for `h`, sampling `grid_size` points for A2.
pub fn check_assumptions<M: Majorant + ?Sized>(h: &M, grid_size: usize) -> Result<AssumptionReport> {
    if grid_size < 16 {
        return Err(Error::Invalid(format!("grid_size must be >= 16, got {grid_size}")));
    }
    let mut diagnostics = Vec::new();

    let (h0, d0, dd0) = (h.value(0.0), h.first(0.0), h.second(0.0));
    let a1_holds = if !(h0.is_finite() && d0.is_finite() && dd0.is_finite()) {
        diagnostics.push(format!("A1: non-finite evaluation at t = 0 (h={h0}, h'={d0}, h''={dd0})"));
        false
    } else {
        let mut ok = true;
        if h0 <= 0.0 {
            ok = false;
            if h0 == 0.0 {
                diagnostics.push(
                    "A1: h(0) = 0, x0 already solves F(x) = 0; outside the theorem hypotheses".into(),
                );
            } else {
                diagnostics.push(format!("A1: h(0) = {h0} is not positive"));
            }
        }
        if dd0 <= 0.0 {
            ok = false;
            diagnostics.push(format!("A1: h''(0) = {dd0} is not positive"));
        }
        if (d0 + 1.0).abs() > ZERO_TOL {
            ok = false;
            diagnostics.push(format!("A1: h'(0) = {d0}, expected -1"));
        }
        ok
    };

    let t_star = match smallest_root(h) {
        Ok(t) => Some(t),
        Err(e) => {
            diagnostics.push(format!("A3: {e}"));
            None
        }
    };
    let h_prime_at_t_star = t_star.map(|t| h.first(t));

    let bound = h.domain_bound();
    let mut upper = match t_star {
        Some(t) if t > 0.0 => 2.0 * t,
        _ => 1.0,
    };
    if bound.is_finite() {
        upper = upper.min(0.999 * bound);
    }
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| upper * i as f64 / (grid_size - 1) as f64)
        .collect();
    let second: Vec<f64> = grid.iter().map(|&t| h.second(t)).collect();

    let mut a2_holds = true;
    if let Some(i) = second.iter().position(|v| !v.is_finite()) {
        a2_holds = false;
        diagnostics.push(format!("A2: h'' is not finite at t = {}", grid[i]));
    } else {
        let scale = second.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if let Some(i) = (0..grid_size - 1).find(|&i| second[i + 1] < second[i] - ZERO_TOL * scale) {
            a2_holds = false;
            diagnostics.push(format!(
                "A2: h'' decreases between t = {} and t = {}",
                grid[i],
                grid[i + 1]
            ));
        }
        if let Some(i) = (0..grid_size - 2)
            .find(|&i| second[i + 1] > 0.5 * (second[i] + second[i + 2]) + ZERO_TOL * scale)
        {
            a2_holds = false;
            diagnostics.push(format!("A2: h'' fails midpoint convexity at t = {}", grid[i + 1]));
        }
        if let Some(&t) = grid[1..]
            .iter()
            .find(|&&t| h.left_second_derivative(t) < -ZERO_TOL * scale)
        {
            a2_holds = false;
            diagnostics.push(format!("A2: D⁻h''({t}) is negative"));
        }
    }

    let derivatives_consistent = derivatives_consistent(h, &grid);
    if !derivatives_consistent {
        diagnostics.push("h, h', h'' are not consistent under finite differences".into());
    }

    let a3_holds = match (t_star, h_prime_at_t_star) {
        (Some(_), Some(d)) if d < -ZERO_TOL => true,
        (Some(t), Some(d)) => {
            diagnostics.push(format!("A3: h'(t*) = {d} at t* = {t} is not strictly negative"));
            false
        }
        _ => false,
    };

    Ok(AssumptionReport {
        a1_holds,
        a2_holds,
        a3_holds,
        derivatives_consistent,
        t_star,
        h_prime_at_t_star,
        diagnostics,
    })
}

fn derivatives_consistent<M: Majorant + ?Sized>(h: &M, grid: &[f64]) -> bool {
    let stride = (grid.len() / 8).max(1);
    grid.iter().skip(1).step_by(stride).all(|&t| {
        let eps = 1e-5 * t.max(1e-3);
        if t - eps < 0.0 {
            return true;
        }
        let fd1 = (h.value(t + eps) - h.value(t - eps)) / (2.0 * eps);
        let fd2 = (h.first(t + eps) - h.first(t - eps)) / (2.0 * eps);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * (1.0 + a.abs().max(b.abs()));
        close(fd1, h.first(t)) && close(fd2, h.second(t))
    })
}

/// Smallest zero `t*` of `h` in `[0, R)`.
///
/// Uses the family's closed form when available, otherwise
/// [`bracketed_smallest_root`].
pub fn smallest_root<M: Majorant + ?Sized>(h: &M) -> Result<f64> {
    if h.has_closed_forms() {
        h.closed_form_root().ok_or(Error::NoRoot)
    } else {
        bracketed_smallest_root(h)
    }
}

/// Generic root finder for the smallest zero of `h`.
///
/// Locates the minimiser of `h` by bisection on `h' = 0`, scans a geometric
/// grid from near zero toward it for the first sign change, bisects, and
/// polishes with at most three Newton steps.
pub fn bracketed_smallest_root<M: Majorant + ?Sized>(h: &M) -> Result<f64> {
    let h0 = h.value(0.0);
    if h0 == 0.0 {
        return Ok(0.0);
    }
    if !(h0 > 0.0) {
        return Err(Error::NoRoot);
    }
    let end = descent_end(h);
    if !(h.value(end) <= 0.0) {
        return Err(Error::NoRoot);
    }

    let mut lo = 0.0;
    let mut hi = end;
    for k in (0..=60).rev() {
        let t = end * 0.5_f64.powi(k);
        if h.value(t) <= 0.0 {
            hi = t;
            break;
        }
        lo = t;
    }
    let t = bisect(|t| h.value(t), lo, hi);
    Ok(newton_polish(h, t, lo, hi))
}

/// Second zero `ρ = sup{t ∈ [t*, R): h(t) <= 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniquenessRadius {
    pub rho: f64,
    /// `h` stays non-positive up to `R`; the supremum may not be attained.
    pub at_domain_bound: bool,
}

pub fn uniqueness_radius<M: Majorant + ?Sized>(h: &M) -> Result<UniquenessRadius> {
    if h.has_closed_forms() {
        let rho = h.closed_form_second_root().ok_or(Error::NoRoot)?;
        return Ok(UniquenessRadius { rho, at_domain_bound: false });
    }
    let bound = h.domain_bound();
    let end = descent_end(h);
    if !(h.value(end) <= 0.0) {
        return Err(Error::NoRoot);
    }
    let hi = probe_points(bound)
        .filter(|&t| t > end)
        .find(|&t| h.value(t) > 0.0);
    match hi {
        None => Ok(UniquenessRadius { rho: bound, at_domain_bound: true }),
        Some(hi) => {
            let rho = bisect(|t| -h.value(t), end, hi);
            Ok(UniquenessRadius { rho: newton_polish(h, rho, end, hi), at_domain_bound: false })
        }
    }
}

/// `L_h(t) = h(t) h''(t) / (2 h'(t)²)`.
///
/// Where `|h(t)|` is within the root residual target, `t` is a root and the
/// result is exactly zero.
pub fn l_h<M: Majorant + ?Sized>(h: &M, t: f64) -> Result<f64> {
    let d = h.first(t);
    if d.abs() < 1e-300 {
        return Err(Error::SingularDerivative { t });
    }
    let v = h.value(t);
    if v.abs() <= ROOT_RESIDUAL_TOL * h.value(0.0).abs().max(1.0) {
        return Ok(0.0);
    }
    Ok(v * h.second(t) / (2.0 * d * d))
}

/// Halley map `H_h(t) = t - h(t) / ((1 - L_h(t)) h'(t))` for `t ∈ [0, t*)`.
pub fn halley_map<M: Majorant + ?Sized>(h: &M, t: f64) -> Result<f64> {
    let t_star = smallest_root(h)?;
    if !(t >= 0.0 && t < t_star) {
        return Err(Error::Domain { t, t_star });
    }
    halley_map_unchecked(h, t)
}

fn halley_map_unchecked<M: Majorant + ?Sized>(h: &M, t: f64) -> Result<f64> {
    let l = l_h(h, t)?;
    Ok(t - h.value(t) / ((1.0 - l) * h.first(t)))
}

/// Prefix of the majorizing sequence `t_0 = 0, t_{k+1} = H_h(t_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorizingSequence {
    pub points: Vec<f64>,
    pub t_star: f64,
    /// `t* - t_k` for each point.
    pub gaps: Vec<f64>,
    pub converged_at: Option<usize>,
}

/// Iterate the Halley map from zero.
///
/// Stops after `max_iters` steps, once `t* - t_k < tol`, once
/// `t_{k+1} - t_k < tol * t*`, or when rounding would break strict monotonicity
/// below `t*`. A majorant with `h(0) = 0` (and A2, A3 holding) yields the
/// trivial sequence `[0]`.
pub fn majorizing_sequence<M: Majorant + ?Sized>(
    h: &M,
    max_iters: usize,
    tol: f64,
) -> Result<MajorizingSequence> {
    if max_iters == 0 {
        return Err(Error::Invalid("max_iters must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tol must be > 0, got {tol}")));
    }
    let report = check_assumptions(h, 64)?;
    let trivial = h.value(0.0) == 0.0 && report.a2_holds && report.a3_holds;
    if !report.all_hold() && !trivial {
        return Err(Error::Assumptions(Box::new(report)));
    }
    let t_star = report.t_star.expect("A3 implies a root");
    if trivial {
        return Ok(MajorizingSequence {
            points: vec![0.0],
            t_star,
            gaps: vec![t_star],
            converged_at: Some(0),
        });
    }
    Ok(iterate_sequence(h, t_star, max_iters, tol))
}

pub(crate) fn iterate_sequence<M: Majorant + ?Sized>(
    h: &M,
    t_star: f64,
    max_iters: usize,
    tol: f64,
) -> MajorizingSequence {
    let mut points = vec![0.0];
    let mut converged_at = None;
    for k in 0..max_iters {
        let t = points[k];
        let next = match halley_map_unchecked(h, t) {
            Ok(v) if v > t && v < t_star => v,
            _ => {
                converged_at = Some(k);
                break;
            }
        };
        points.push(next);
        if t_star - next < tol || next - t < tol * t_star {
            converged_at = Some(k + 1);
            break;
        }
    }
    let gaps = points.iter().map(|&t| t_star - t).collect();
    MajorizingSequence { points, t_star, gaps, converged_at }
}

/// Constant `C` in `t* - H_h(t) <= C (t* - t)³`:
/// `(1/3)(h''(t*)/h'(t*))² + (2/9) D⁻h''(t*) / (-h'(t*))`.
pub fn cubic_error_constant<M: Majorant + ?Sized>(h: &M) -> Result<f64> {
    let t_star = smallest_root(h)?;
    let d = h.first(t_star);
    if d >= -ZERO_TOL {
        return Err(Error::DegenerateRoot { h_prime: d });
    }
    let ratio = h.second(t_star) / d;
    Ok(ratio * ratio / 3.0 + 2.0 / 9.0 * h.left_second_derivative(t_star) / (-d))
}

// Points marching toward the end of the domain.
fn probe_points(bound: f64) -> Box<dyn Iterator<Item = f64>> {
    if bound.is_finite() {
        Box::new((1..=52).map(move |k| bound * (1.0 - 0.5_f64.powi(k))))
    } else {
        Box::new((0..=60).map(|k| 2.0_f64.powi(k)))
    }
}

// End of the decreasing branch of h: the zero of h' if one is found, else the
// last probe point toward R.
fn descent_end<M: Majorant + ?Sized>(h: &M) -> f64 {
    let mut last = 0.0;
    for t in probe_points(h.domain_bound()) {
        let d = h.first(t);
        if !d.is_finite() {
            break;
        }
        if d > 0.0 {
            return bisect(|s| h.first(s), 0.0, t);
        }
        last = t;
    }
    last
}

// Bisection for a sign change of `f` from positive to non-positive (or
// negative to non-negative) on `[lo, hi]`, run to floating-point resolution.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let lo_sign = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
        if (f(mid) > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

fn newton_polish<M: Majorant + ?Sized>(h: &M, mut t: f64, lo: f64, hi: f64) -> f64 {
    for _ in 0..3 {
        let d = h.first(t);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = t - h.value(t) / d;
        if !(next >= lo && next <= hi) || h.value(next).abs() >= h.value(t).abs() {
            break;
        }
        t = next;
    }
    t
}
