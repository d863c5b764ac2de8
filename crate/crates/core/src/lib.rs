//! Halley's method for finite-dimensional nonlinear systems, together with
//! semilocal convergence certificates built from scalar majorizing functions.
//!
//! The crate is organised around four pieces:
//!
//! * [`majorant`] -- scalar majorizing functions `h`, the assumption checker,
//!   root finding, the real-line Halley map and majorizing sequences.
//! * [`problem`] -- the operator `F` with its Jacobian and second-derivative
//!   action, Halley and series-family steps, and the solver loop.
//! * [`certificate`] -- Kantorovich-type (cubic majorant) and Smale-type
//!   (rational majorant) certificates, plus checks of a solve trace against
//!   the a priori error schedule.
//! * [`hammerstein`] -- Nyström discretization of a Hammerstein integral
//!   equation with the Green kernel, its analytic bounds and the
//!   existence/uniqueness radius table.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
mod error;
pub mod hammerstein;
mod linalg;
pub mod majorant;
pub mod problem;

pub use error::{Error, Result};
