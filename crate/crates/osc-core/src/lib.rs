//! # osc-core
//!
//! Numerical oscillation tests for first-order differential equations with
//! several deviating arguments, of delay type
//!
//! ```text
//! x'(t) + sum_i p_i(t) x(tau_i(t)) = 0,    tau_i(t) <= t,
//! ```
//!
//! or advanced type
//!
//! ```text
//! x'(t) - sum_i p_i(t) x(sigma_i(t)) = 0,  sigma_i(t) >= t,
//! ```
//!
//! with nonnegative coefficients and possibly non-monotone arguments.
//!
//! The crate evaluates a family of sufficient oscillation conditions: the
//! classical 1/e-type liminf tests, and iterated limsup/liminf tests built
//! from exponential decay-rate kernels obtained by repeated application of
//! the Grönwall inequality. Non-monotone arguments are replaced by their
//! monotone envelopes (running supremum of delays, running infimum of
//! advances). A method-of-steps Runge-Kutta integrator provides empirical
//! cross-checks for delay problems.
//!
//! All verdicts are one-sided: `Oscillatory` means a sufficient condition
//! was verified with a strictness margin; `Inconclusive` makes no claim of
//! nonoscillation.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature to use it in that configuration. File formats and the CLI
//! live in the companion `osc-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// negated comparisons are used on purpose: `!(x > 0.0)` rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod criteria;
pub mod envelope;
pub mod error;
pub mod grid;
pub mod kernel;
mod math;
pub mod piecewise;
pub mod problem;
pub mod simulate;
pub mod table;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use piecewise::{Cell, PiecewiseCellFunction, Side};
pub use problem::{AdvancedProblem, DelayProblem, HistoryFunction, Term, ValidationReport};
