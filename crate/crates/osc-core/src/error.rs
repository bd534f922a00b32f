//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Evaluation below a function's base start, or outside a table range.
    Domain { what: String, t: f64 },
    /// Cell list does not partition the base window.
    BadCells(String),
    /// Invalid construction parameter (step, window, iteration count, ...).
    BadParameter(String),
    /// Kernel evaluated with arguments in the wrong order.
    ArgumentOrder { left: f64, right: f64 },
    /// A deviated argument fell outside the kernel table range.
    Range { what: String, t: f64 },
    /// Non-finite value produced at a grid node.
    NonFinite { what: String, t: f64 },
    /// Two sampled functions do not share a grid.
    GridMismatch,
    /// Not enough samples in the estimation window.
    TooFewSamples { have: usize, need: usize },
    /// Autonomous kernel iteration overflowed (supercritical coefficient).
    Diverged { iteration: u32 },
    /// Envelope ordering violated numerically.
    EnvelopeOrder { t: f64, detail: String },
    /// Simulation requested for an advanced problem (not a well-posed IVP).
    AdvancedNotSimulable,
    /// Delayed lookup before the start of the history function.
    HistoryTooShort { needed: f64, start: f64 },
    /// Candidate solution breakpoints not aligned with the grid.
    CellMisaligned { t: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, t } => write!(f, "{what}: t = {t} is outside the domain"),
            Error::BadCells(msg) => write!(f, "invalid cell list: {msg}"),
            Error::BadParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::ArgumentOrder { left, right } => {
                write!(f, "kernel arguments out of order: {left} vs {right}")
            }
            Error::Range { what, t } => {
                write!(
                    f,
                    "{what}: t = {t} is outside the table range (insufficient warm-up)"
                )
            }
            Error::NonFinite { what, t } => write!(f, "{what}: non-finite value at t = {t}"),
            Error::GridMismatch => write!(f, "operands are defined on different grids"),
            Error::TooFewSamples { have, need } => {
                write!(
                    f,
                    "too few samples for a tail estimate: have {have}, need {need}"
                )
            }
            Error::Diverged { iteration } => {
                write!(
                    f,
                    "kernel iteration diverges at r = {iteration} (coefficient above 1/e)"
                )
            }
            Error::EnvelopeOrder { t, detail } => {
                write!(f, "envelope ordering violated at t = {t}: {detail}")
            }
            Error::AdvancedNotSimulable => write!(
                f,
                "advanced equations are not simulated: forward integration from an \
                 initial condition is not well posed when arguments lie ahead of t"
            ),
            Error::HistoryTooShort { needed, start } => write!(
                f,
                "delayed lookup at t = {needed} precedes the history start {start}"
            ),
            Error::CellMisaligned { t } => {
                write!(f, "candidate cell boundary at t = {t} is not a grid node")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
