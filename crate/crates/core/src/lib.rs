//! Homogeneous p-harmonic functions on circular cones.
//!
//! A positive p-harmonic function in the cone `K(alpha) = {x : x_1 > cos(alpha)|x|}`
//! that vanishes on the boundary has the form `u = r^lambda phi(theta)`. This
//! crate computes the two exponents `lambda_1 > 0 > lambda_2` and the angular
//! profile `phi` by shooting on the separated angular equation, and ships the
//! closed forms, asymptotic laws and an independent finite-element energy check
//! used to validate the numerics.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod eigensolver;
pub mod error;
pub mod parallel;
pub mod pdevalidate;
pub mod problem;
pub mod profile;
pub mod reference;
pub mod shooting;

mod ode;

pub use eigensolver::{solve_lambda, EigenResult};
pub use error::{Error, Result};
pub use problem::{Branch, ConeProblem, Tolerances};
