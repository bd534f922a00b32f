//! Problem model: delay/advanced equations and hypothesis validation.
//!
//! A problem is a list of terms `(p_i, tau_i)` (or `(p_i, sigma_i)`); the
//! structural hypotheses are `p_i >= 0`, `tau_i(t) <= t` with
//! `tau_i(t) -> infinity` for delay equations, and `sigma_i(t) >= t` for
//! advanced equations. Validation samples the hypotheses on a grid that
//! contains every cell endpoint, which is exact for the affine cell class,
//! and checks the limit hypothesis structurally (sampling cannot observe a
//! limit): a periodically recurring cell must gain `c1*P + c2 > 0` per
//! period, which rules out the recurring absolute-constant cells that break
//! the limit condition.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::math;
use crate::piecewise::{PiecewiseCellFunction, Side};

/// One coefficient/argument pair of the equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: PiecewiseCellFunction,
    pub argument: PiecewiseCellFunction,
}

/// `x'(t) + sum_i p_i(t) x(tau_i(t)) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayProblem {
    terms: Vec<Term>,
    base_start: f64,
}

/// `x'(t) - sum_i p_i(t) x(sigma_i(t)) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvancedProblem {
    terms: Vec<Term>,
    base_start: f64,
}

/// Initial condition `x(t) = phi(t)` on `(-inf, t_start]`, realized as a
/// bounded piecewise function covering `[start, t_start]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryFunction(PiecewiseCellFunction);

impl HistoryFunction {
    pub fn new(f: PiecewiseCellFunction) -> Self {
        HistoryFunction(f)
    }

    pub fn start(&self) -> f64 {
        self.0.base_start()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.0.eval(t)
    }

    pub fn inner(&self) -> &PiecewiseCellFunction {
        &self.0
    }
}

fn common_base_start(terms: &[Term]) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::BadParameter(
            "problem needs at least one term".into(),
        ));
    }
    let mut start = f64::NEG_INFINITY;
    for t in terms {
        start = start
            .max(t.coefficient.base_start())
            .max(t.argument.base_start());
    }
    Ok(start)
}

macro_rules! problem_common {
    ($ty:ident) => {
        impl $ty {
            pub fn new(terms: Vec<Term>) -> Result<Self> {
                let base_start = common_base_start(&terms)?;
                Ok($ty { terms, base_start })
            }

            pub fn terms(&self) -> &[Term] {
                &self.terms
            }

            /// Number of deviating arguments `m`.
            pub fn term_count(&self) -> usize {
                self.terms.len()
            }

            /// Earliest time at which every component function is defined.
            pub fn base_start(&self) -> f64 {
                self.base_start
            }

            /// `sum_i p_i(t)`, one-sided.
            pub fn coefficient_sum(&self, t: f64, side: Side) -> Result<f64> {
                let mut s = 0.0;
                for term in &self.terms {
                    s += term.coefficient.eval_side(t, side)?;
                }
                Ok(s)
            }

            /// All component functions, for grid construction.
            pub fn functions(&self) -> Vec<&PiecewiseCellFunction> {
                self.terms
                    .iter()
                    .flat_map(|t| [&t.coefficient, &t.argument])
                    .collect()
            }
        }
    };
}

problem_common!(DelayProblem);
problem_common!(AdvancedProblem);

impl DelayProblem {
    /// Largest sampled delay span `t - min_i tau_i(t)`; kernel warm-up and
    /// simulation history requirements are phrased in terms of it.
    pub fn max_delay_span(&self, grid: &Grid) -> Result<f64> {
        let mut span = 0.0f64;
        for &t in grid.nodes() {
            for term in &self.terms {
                span = span.max(t - term.argument.eval(t)?);
            }
        }
        Ok(span)
    }
}

impl AdvancedProblem {
    /// `Δ_max = sup_t max_i (sigma_i(t) - t)` over the sampled window
    /// (exact for affine cells: the extrema sit on cell endpoints, which are
    /// grid nodes).
    pub fn advance_bound(&self, grid: &Grid) -> Result<f64> {
        let mut bound = 0.0f64;
        for &t in grid.nodes() {
            for term in &self.terms {
                bound = bound.max(term.argument.eval_side(t, Side::Right)? - t);
                bound = bound.max(term.argument.eval_side(t, Side::Left)? - t);
            }
        }
        Ok(bound)
    }
}

/// Location and value of a hypothesis violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    /// Short check name, e.g. `"p >= 0"`.
    pub name: String,
    /// Term index the check applies to.
    pub term: usize,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
    /// Sampled advance bound (advanced problems only).
    pub advance_bound: Option<f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

const SIGN_TOL: f64 = 1e-12;

fn check_nonnegative(f: &PiecewiseCellFunction, idx: usize, grid: &Grid) -> HypothesisCheck {
    for &t in grid.nodes() {
        for side in [Side::Right, Side::Left] {
            match f.eval_side(t, side) {
                Ok(v) if v < -SIGN_TOL => {
                    return HypothesisCheck {
                        name: "p >= 0".into(),
                        term: idx,
                        passed: false,
                        witness: Some(Witness { t, value: v }),
                        detail: alloc::format!("coefficient is negative at t = {t}"),
                    }
                }
                _ => {}
            }
        }
    }
    HypothesisCheck {
        name: "p >= 0".into(),
        term: idx,
        passed: true,
        witness: None,
        detail: String::new(),
    }
}

fn check_deviation(
    f: &PiecewiseCellFunction,
    idx: usize,
    grid: &Grid,
    delay: bool,
) -> HypothesisCheck {
    let name = if delay {
        "tau(t) <= t"
    } else {
        "sigma(t) >= t"
    };
    for &t in grid.nodes() {
        let tol = SIGN_TOL * math::abs(t).max(1.0);
        for side in [Side::Right, Side::Left] {
            if let Ok(v) = f.eval_side(t, side) {
                let violated = if delay { v > t + tol } else { v < t - tol };
                if violated {
                    return HypothesisCheck {
                        name: name.into(),
                        term: idx,
                        passed: false,
                        witness: Some(Witness { t, value: v }),
                        detail: alloc::format!(
                            "argument value {v} deviates the wrong way at t = {t}"
                        ),
                    };
                }
            }
        }
    }
    HypothesisCheck {
        name: name.into(),
        term: idx,
        passed: true,
        witness: None,
        detail: String::new(),
    }
}

/// Structural check for `lim tau(t) = infinity`.
///
/// Sampled values cannot witness a limit; instead every recurring cell must
/// advance by a positive amount per period. A cell with `c1 = c2 = 0` (an
/// absolute constant recurring in every period) fails, as does any cell
/// whose per-period displacement `c1*P + c2` is nonpositive.
fn check_tends_to_infinity(f: &PiecewiseCellFunction, idx: usize) -> HypothesisCheck {
    let name = "tau(t) -> infinity";
    let fail = |witness_t: f64, value: f64, detail: String| HypothesisCheck {
        name: name.into(),
        term: idx,
        passed: false,
        witness: Some(Witness {
            t: witness_t,
            value,
        }),
        detail,
    };
    match f.period() {
        Some(p) => {
            for c in f.cells() {
                if !c.is_affine() {
                    return fail(
                        f.base_start() + c.lower,
                        0.0,
                        "non-affine argument cell: growth is not structurally verifiable".into(),
                    );
                }
                let displacement = c.c1 * p + c.c2;
                if displacement <= 0.0 {
                    return fail(
                        f.base_start() + c.lower,
                        displacement,
                        alloc::format!(
                            "cell [{}, {}) recurs with per-period displacement {} <= 0",
                            c.lower,
                            c.upper,
                            displacement
                        ),
                    );
                }
            }
        }
        None => {
            let last = f.cells()[f.cells().len() - 1];
            if !last.upper.is_finite() {
                if !last.is_affine() || last.c1 <= 0.0 {
                    return fail(
                        f.base_start() + last.lower,
                        last.c1,
                        "final unbounded cell does not grow".into(),
                    );
                }
            } else {
                return fail(
                    f.domain_end(),
                    0.0,
                    "argument is only defined on a bounded interval".into(),
                );
            }
        }
    }
    HypothesisCheck {
        name: name.into(),
        term: idx,
        passed: true,
        witness: None,
        detail: String::new(),
    }
}

/// Structural check that the deviation `|t - arg(t)|` stays bounded: every
/// recurring cell must advance by exactly one period per period
/// (`c1*P + c2 = P`), or the final unbounded cell must have unit slope.
/// Needed as a precondition of the pointwise weighted tests.
pub fn deviation_bounded(arg: &PiecewiseCellFunction) -> bool {
    match arg.period() {
        Some(p) => arg
            .cells()
            .iter()
            .all(|c| c.is_affine() && math::abs(c.c1 * p + c.c2 - p) <= 1e-9 * p.max(1.0)),
        None => {
            let last = arg.cells()[arg.cells().len() - 1];
            !last.upper.is_finite() && last.is_affine() && math::abs(last.c1 - 1.0) <= 1e-12
        }
    }
}

fn validation_grid(
    functions: &[&PiecewiseCellFunction],
    base_start: f64,
    window: (f64, f64),
    h: f64,
) -> Result<Arc<Grid>> {
    let lo = window.0.max(base_start);
    if !(window.1 > lo) {
        return Err(Error::BadParameter("empty validation window".into()));
    }
    grid::build_grid(functions, (lo, window.1), h, 0.0)
}

/// Checks the delay hypotheses on `window` with step `h`.
///
/// Failures are carried in the report, not returned as errors.
pub fn validate_delay(
    problem: &DelayProblem,
    window: (f64, f64),
    h: f64,
) -> Result<ValidationReport> {
    let grid = validation_grid(&problem.functions(), problem.base_start(), window, h)?;
    let mut checks = Vec::new();
    for (i, term) in problem.terms().iter().enumerate() {
        checks.push(check_nonnegative(&term.coefficient, i, &grid));
        checks.push(check_deviation(&term.argument, i, &grid, true));
        checks.push(check_tends_to_infinity(&term.argument, i));
    }
    Ok(ValidationReport {
        checks,
        advance_bound: None,
    })
}

/// Checks the advanced hypotheses on `window` and computes the advance
/// bound `Δ_max`.
pub fn validate_advanced(
    problem: &AdvancedProblem,
    window: (f64, f64),
    h: f64,
) -> Result<ValidationReport> {
    let grid = validation_grid(&problem.functions(), problem.base_start(), window, h)?;
    let mut checks = Vec::new();
    for (i, term) in problem.terms().iter().enumerate() {
        checks.push(check_nonnegative(&term.coefficient, i, &grid));
        checks.push(check_deviation(&term.argument, i, &grid, false));
    }
    let bound = problem.advance_bound(&grid)?;
    Ok(ValidationReport {
        checks,
        advance_bound: Some(bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil;

    #[test]
    fn two_delay_fixture_validates() {
        let p = testutil::ex31_problem();
        let report = validate_delay(&p, (1.0, 11.0), 1e-2).unwrap();
        assert!(report.passed(), "{:?}", report.failures().next());
    }

    #[test]
    fn recurring_constant_cell_fails_limit_check() {
        let p = testutil::ex22_problem();
        let report = validate_delay(&p, (0.0, 10.0), 1e-2).unwrap();
        assert!(!report.passed());
        let failure = report.failures().next().unwrap();
        assert_eq!(failure.name, "tau(t) -> infinity");
        assert!(failure.witness.is_some());
        // the offending cell is the constant -1 on [2k, 2k+1)
        assert_eq!(failure.witness.as_ref().unwrap().t, 0.0);
        // the other hypotheses hold
        assert!(report
            .checks
            .iter()
            .filter(|c| c.name != "tau(t) -> infinity")
            .all(|c| c.passed));
    }

    #[test]
    fn negative_coefficient_fails_with_witness() {
        let p = DelayProblem::new(alloc::vec![Term {
            coefficient: PiecewiseCellFunction::constant(0.0, -1.0),
            argument: testutil::delay_by(0.0, 1.0),
        }])
        .unwrap();
        let report = validate_delay(&p, (0.0, 5.0), 0.5).unwrap();
        let failure = report.failures().next().unwrap();
        assert_eq!(failure.name, "p >= 0");
        assert_eq!(failure.witness.as_ref().unwrap().t, 0.0);
    }

    #[test]
    fn constant_delay_always_passes() {
        for d in [0.25, 1.0, 3.5] {
            let p = DelayProblem::new(alloc::vec![Term {
                coefficient: PiecewiseCellFunction::constant(0.0, 0.2),
                argument: testutil::delay_by(0.0, d),
            }])
            .unwrap();
            assert!(validate_delay(&p, (0.0, 8.0), 0.1).unwrap().passed());
        }
    }

    #[test]
    fn advanced_fixture_bound() {
        let p = testutil::ex32_problem();
        let report = validate_advanced(&p, (1.0, 9.0), 1e-2).unwrap();
        assert!(report.passed());
        // sup over one period of max(sigma_i(t) - t) = 4.1, attained at t = 2k+2.
        assert!((report.advance_bound.unwrap() - 4.1).abs() < 1e-9);
    }

    #[test]
    fn identity_argument_is_a_valid_advance() {
        let p = AdvancedProblem::new(alloc::vec![Term {
            coefficient: PiecewiseCellFunction::constant(0.0, 0.3),
            argument: testutil::delay_by(0.0, 0.0),
        }])
        .unwrap();
        let report = validate_advanced(&p, (0.0, 6.0), 0.1).unwrap();
        assert!(report.passed());
        assert!(report.advance_bound.unwrap().abs() < 1e-12);
    }

    #[test]
    fn delay_posing_as_advance_fails_everywhere() {
        let p = AdvancedProblem::new(alloc::vec![Term {
            coefficient: PiecewiseCellFunction::constant(0.0, 0.3),
            argument: testutil::delay_by(0.0, 1.0),
        }])
        .unwrap();
        let report = validate_advanced(&p, (0.0, 6.0), 0.1).unwrap();
        let failure = report.failures().next().unwrap();
        assert_eq!(failure.name, "sigma(t) >= t");
        assert_eq!(failure.witness.as_ref().unwrap().t, 0.0);
    }

    #[test]
    fn validation_is_pure() {
        let p = testutil::ex31_problem();
        let a = validate_delay(&p, (1.0, 9.0), 0.05).unwrap();
        let b = validate_delay(&p, (1.0, 9.0), 0.05).unwrap();
        assert_eq!(a, b);
    }
}
