#![allow(dead_code)]

use halley_cert::majorant::{CubicMajorant, Majorant, SmaleMajorant};
use halley_cert::problem::NonlinearSystem;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Bisection to floating-point resolution for a sign change on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let lo_positive = f(lo) > 0.0;
    assert_ne!(lo_positive, f(hi) > 0.0, "no sign change on [{lo}, {hi}]");
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return if f(lo).abs() <= f(hi).abs() { lo } else { hi };
        }
        if (f(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Both zeros of a convex majorant by bracketing around the minimiser.
pub fn bisection_roots<M: Majorant>(h: &M) -> (f64, f64) {
    let mut upper = 1.0;
    let bound = h.domain_bound();
    while h.first(upper) <= 0.0 {
        upper = if bound.is_finite() { 0.5 * (upper + bound) } else { 2.0 * upper };
    }
    let argmin = bisect(|t| h.first(t), 0.0, upper);
    let mut far = argmin.max(1e-3);
    while h.value(far) <= 0.0 {
        far = if bound.is_finite() { 0.5 * (far + bound) } else { 2.0 * far };
    }
    (bisect(|t| h.value(t), 0.0, argmin), bisect(|t| h.value(t), argmin, far))
}

pub fn random_cubic(rng: &mut impl Rng) -> CubicMajorant {
    let eta = rng.random_range(0.05..2.0);
    let lip = rng.random_range(0.05..2.0);
    let b = CubicMajorant::new(0.0, eta, lip).unwrap().criterion_bound();
    CubicMajorant::new(rng.random_range(0.01..0.99) * b, eta, lip).unwrap()
}

pub fn random_smale(rng: &mut impl Rng) -> SmaleMajorant {
    let gamma = rng.random_range(0.1..5.0);
    let alpha = rng.random_range(0.01..0.99) * SmaleMajorant::criterion_bound();
    SmaleMajorant::new(alpha / gamma, gamma).unwrap()
}

/// Composite Simpson rule.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `F_i(x) = (A x)_i + ½ xᵀ Q_i x + c_i x_i³ - b_i`.
pub struct PolySystem {
    pub a: DMatrix<f64>,
    pub q: Vec<DMatrix<f64>>,
    pub c: DVector<f64>,
    pub b: DVector<f64>,
}

impl PolySystem {
    pub fn random(rng: &mut impl Rng, n: usize, nonlinearity: f64) -> Self {
        let a = DMatrix::identity(n, n) * 2.0 + DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.5..0.5));
        let q = (0..n)
            .map(|_| {
                let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0) * nonlinearity);
                &m + m.transpose()
            })
            .collect();
        let c = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0) * nonlinearity);
        let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        Self { a, q, c, b }
    }
}

impl NonlinearSystem for PolySystem {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let quad = DVector::from_iterator(self.dim(), self.q.iter().map(|q| 0.5 * x.dot(&(q * x))));
        &self.a * x + quad + self.c.component_mul(&x.map(|v| v.powi(3))) - &self.b
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut j = self.a.clone();
        for (i, q) in self.q.iter().enumerate() {
            let qx = q * x;
            for k in 0..self.dim() {
                j[(i, k)] += qx[k];
            }
            j[(i, i)] += 3.0 * self.c[i] * x[i] * x[i];
        }
        j
    }
    fn second(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| {
            u.dot(&(&self.q[i] * v)) + 6.0 * self.c[i] * x[i] * u[i] * v[i]
        })
    }
}

/// `x ↦ M F(x)`.
pub struct Premultiplied<'a, P> {
    pub inner: &'a P,
    pub m: DMatrix<f64>,
}

impl<P: NonlinearSystem> NonlinearSystem for Premultiplied<'_, P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.m * self.inner.eval(x)
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        &self.m * self.inner.jacobian(x)
    }
    fn second(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        &self.m * self.inner.second(x, u, v)
    }
}

pub fn random_well_conditioned(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.3..0.3) / n as f64)
}
