//! Shared problem constructors for unit tests.

use alloc::vec;

use crate::piecewise::{Cell, PiecewiseCellFunction};
use crate::problem::{AdvancedProblem, DelayProblem, HistoryFunction, Term};

/// `tau(t) = t - d` (or `sigma` for `d = 0` / negative `d`), aperiodic.
pub(crate) fn delay_by(base_start: f64, d: f64) -> PiecewiseCellFunction {
    PiecewiseCellFunction::new(
        base_start,
        None,
        vec![Cell::affine(0.0, f64::INFINITY, -d, 1.0, 0.0)],
    )
    .unwrap()
}

/// `sigma(t) = t + a`, aperiodic.
pub(crate) fn advance_by(base_start: f64, a: f64) -> PiecewiseCellFunction {
    delay_by(base_start, -a)
}

/// Autonomous delay problem `x' + p x(t - d) = 0` from `t = 0`.
pub(crate) fn autonomous_delay(p: f64, d: f64) -> DelayProblem {
    DelayProblem::new(vec![Term {
        coefficient: PiecewiseCellFunction::constant(0.0, p),
        argument: delay_by(0.0, d),
    }])
    .unwrap()
}

/// Autonomous advanced problem `x' - p x(t + a) = 0` from `t = 0`.
pub(crate) fn autonomous_advanced(p: f64, a: f64) -> AdvancedProblem {
    AdvancedProblem::new(vec![Term {
        coefficient: PiecewiseCellFunction::constant(0.0, p),
        argument: advance_by(0.0, a),
    }])
    .unwrap()
}

pub(crate) const P_EX31_1: f64 = 0.18393972058572117; // 1/(2e)
pub(crate) const P_EX31_2: f64 = 0.16721792780520103; // 1/(2.2e)

/// Two-delay periodic problem from `t = 1`:
/// `x' + 1/(2e) x(tau_1(t)) + 1/(2.2e) x(tau_2(t)) = 0` with
/// `tau_1 = -t+4k+1` on `[2k+1, 2k+2)`, `3t-4k-7` on `[2k+2, 2k+3)` and
/// `tau_2 = tau_1 - 0.1`.
pub(crate) fn ex31_problem() -> DelayProblem {
    let tau1 = PiecewiseCellFunction::new(
        1.0,
        Some(2.0),
        vec![
            Cell::affine(0.0, 1.0, 1.0, -1.0, 4.0),
            Cell::affine(1.0, 2.0, -7.0, 3.0, -4.0),
        ],
    )
    .unwrap();
    let tau2 = PiecewiseCellFunction::new(
        1.0,
        Some(2.0),
        vec![
            Cell::affine(0.0, 1.0, 0.9, -1.0, 4.0),
            Cell::affine(1.0, 2.0, -7.1, 3.0, -4.0),
        ],
    )
    .unwrap();
    DelayProblem::new(vec![
        Term {
            coefficient: PiecewiseCellFunction::constant(1.0, P_EX31_1),
            argument: tau1,
        },
        Term {
            coefficient: PiecewiseCellFunction::constant(1.0, P_EX31_2),
            argument: tau2,
        },
    ])
    .unwrap()
}

/// Two-advance periodic problem from `t = 1`:
/// `x' - 7/40 x(sigma_1(t)) - 7/40 x(sigma_2(t)) = 0` with
/// `sigma_1 = 4t-6k-2` on `[2k+1, 2k+2)`, `-2t+6k+10` on `[2k+2, 2k+3)` and
/// `sigma_2 = sigma_1 + 0.1`.
pub(crate) fn ex32_problem() -> AdvancedProblem {
    let sigma1 = PiecewiseCellFunction::new(
        1.0,
        Some(2.0),
        vec![
            Cell::affine(0.0, 1.0, -2.0, 4.0, -6.0),
            Cell::affine(1.0, 2.0, 10.0, -2.0, 6.0),
        ],
    )
    .unwrap();
    let sigma2 = PiecewiseCellFunction::new(
        1.0,
        Some(2.0),
        vec![
            Cell::affine(0.0, 1.0, -1.9, 4.0, -6.0),
            Cell::affine(1.0, 2.0, 10.1, -2.0, 6.0),
        ],
    )
    .unwrap();
    AdvancedProblem::new(vec![
        Term {
            coefficient: PiecewiseCellFunction::constant(1.0, 0.175),
            argument: sigma1,
        },
        Term {
            coefficient: PiecewiseCellFunction::constant(1.0, 0.175),
            argument: sigma2,
        },
    ])
    .unwrap()
}

/// Single-delay problem from `t = 0` with `p ≡ 2` and the recurring
/// constant argument: `tau = -1` on `[2k, 2k+1)`, `tau = t` on `[2k+1, 2k+2)`.
/// The argument does not tend to infinity.
pub(crate) fn ex22_problem() -> DelayProblem {
    let tau = PiecewiseCellFunction::new(
        0.0,
        Some(2.0),
        vec![
            Cell::affine(0.0, 1.0, -1.0, 0.0, 0.0),
            Cell::affine(1.0, 2.0, 0.0, 1.0, 0.0),
        ],
    )
    .unwrap();
    DelayProblem::new(vec![Term {
        coefficient: PiecewiseCellFunction::constant(0.0, 2.0),
        argument: tau,
    }])
    .unwrap()
}

/// Corrected nonoscillatory candidate for the recurring-constant problem:
/// `x = e^{-2k}` on `[2k, 2k+1)`, `e^{-2(t-k-1)}` on `[2k+1, 2k+2)`.
pub(crate) fn ex22_candidate() -> PiecewiseCellFunction {
    PiecewiseCellFunction::new(
        0.0,
        Some(2.0),
        vec![
            Cell {
                lower: 0.0,
                upper: 1.0,
                c0: 1.0,
                c1: 0.0,
                c2: 0.0,
                d0: 0.0,
                d1: 0.0,
                d2: -2.0,
            },
            Cell {
                lower: 1.0,
                upper: 2.0,
                c0: 1.0,
                c1: 0.0,
                c2: 0.0,
                d0: 2.0,
                d1: -2.0,
                d2: 2.0,
            },
        ],
    )
    .unwrap()
}

/// History `phi(t) = t + 1` from `t = -1`.
pub(crate) fn ex22_history() -> HistoryFunction {
    HistoryFunction::new(
        PiecewiseCellFunction::new(
            -1.0,
            None,
            vec![Cell::affine(0.0, f64::INFINITY, 1.0, 1.0, 0.0)],
        )
        .unwrap(),
    )
}

/// History `phi(t) = e^{-t}` from `start`.
pub(crate) fn exp_decay_history(start: f64) -> HistoryFunction {
    HistoryFunction::new(
        PiecewiseCellFunction::new(
            start,
            None,
            vec![Cell {
                lower: 0.0,
                upper: f64::INFINITY,
                c0: 1.0,
                c1: 0.0,
                c2: 0.0,
                d0: 0.0,
                d1: -1.0,
                d2: 0.0,
            }],
        )
        .unwrap(),
    )
}

/// Constant history `phi ≡ value` from `start`.
pub(crate) fn constant_history(start: f64, value: f64) -> HistoryFunction {
    HistoryFunction::new(PiecewiseCellFunction::constant(start, value))
}
