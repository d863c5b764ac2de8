use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Pivots below this fraction of the largest entry of the matrix are
/// treated as zero.
const PIVOT_REL_TOL: f64 = 1e-13;

/// Norm used for vectors and (induced) for matrices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    #[default]
    Max,
    Euclidean,
}

impl NormKind {
    pub fn vector(self, v: &DVector<f64>) -> f64 {
        match self {
            NormKind::Max => v.amax(),
            NormKind::Euclidean => v.norm(),
        }
    }

    pub fn matrix(self, m: &DMatrix<f64>) -> f64 {
        match self {
            NormKind::Max => m
                .row_iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            NormKind::Euclidean => m.singular_values().max(),
        }
    }
}

/// Partial-pivoting LU with an explicit singularity threshold.
pub(crate) struct Factorization {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factorization {
    pub fn new(m: DMatrix<f64>, what: &str) -> Result<Self> {
        let scale = m.amax();
        if !scale.is_finite() {
            return Err(Error::LinearSolve(format!("{what} has non-finite entries")));
        }
        let lu = m.lu();
        let u = lu.u();
        let min_pivot = u.diagonal().amin();
        if scale == 0.0 || min_pivot < PIVOT_REL_TOL * scale {
            return Err(Error::LinearSolve(format!(
                "{what} is singular: smallest pivot {min_pivot:.3e} against max entry {scale:.3e}"
            )));
        }
        Ok(Self { lu })
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.lu.solve(b).expect("pivots checked at factorization")
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu.solve(b).expect("pivots checked at factorization")
    }
}
