use thiserror::Error;

use crate::majorant::AssumptionReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("no root of the majorizing function on its domain")]
    NoRoot,

    #[error("derivative is numerically zero at t = {t}")]
    SingularDerivative { t: f64 },

    #[error("t = {t} lies outside [0, t*) with t* = {t_star}")]
    Domain { t: f64, t_star: f64 },

    #[error("h'(t*) = {h_prime} is not strictly negative; the criterion sits on its boundary")]
    DegenerateRoot { h_prime: f64 },

    #[error("majorant assumptions violated: {}", .0.diagnostics.join("; "))]
    Assumptions(Box<AssumptionReport>),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("series operator norm ||2 L_F(x)|| = {norm} exceeds 1/2")]
    LfNormExceeded { norm: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}
