//! File formats, report writers and command orchestration for the
//! `osc-test` command-line tool. The numerics live in `osc-core`; this
//! crate owns everything that touches the filesystem.

// negated comparisons are used on purpose: `!(b > a)` rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csvio;
pub mod report;
pub mod run;
pub mod schema;

/// Exit codes of the `osc-test` binary.
pub mod exit {
    /// An oscillation criterion was verified.
    pub const OSCILLATORY: u8 = 0;
    /// File, parse or runtime error.
    pub const ERROR: u8 = 1;
    /// The problem violates a structural hypothesis.
    pub const VALIDATION: u8 = 2;
    /// Simulation was requested for an advanced problem.
    pub const ADVANCED_SIMULATION: u8 = 3;
    /// No implemented sufficient condition fired.
    pub const INCONCLUSIVE: u8 = 10;
}
