//! Method-of-steps integration of delay problems.
//!
//! Forward integration with classical fixed-step Runge-Kutta (4 stages);
//! delayed state lookups interpolate linearly on the dense solution store
//! and fall back to the history function left of the start point. Linear
//! interpolation of delayed stage values caps the observable global order
//! at two, which matches the trapezoid-grade accuracy of the criteria
//! pipeline.
//!
//! Advanced equations are rejected: with arguments ahead of `t` the
//! forward initial-value problem is not well posed.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math;
use crate::piecewise::{PiecewiseCellFunction, Side};
use crate::problem::{DelayProblem, HistoryFunction};

/// Dense numerical solution with its sign-change census.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<f64>,
    step: f64,
    sign_changes: Vec<(f64, f64)>,
    zero_touches: Vec<f64>,
    max_residual: f64,
}

/// Sample magnitudes below this count as touching zero, not crossing it.
const ZERO_TOUCH: f64 = 1e-12;

impl Trajectory {
    /// Wraps externally produced samples (census only, residual unset).
    pub fn from_samples(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::BadParameter(
                "trajectory needs matching sample vectors".into(),
            ));
        }
        let step = times[1] - times[0];
        let (sign_changes, zero_touches) = census(&times, &values);
        Ok(Trajectory {
            times,
            values,
            step,
            sign_changes,
            zero_touches,
            max_residual: 0.0,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn final_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Bracketing intervals of strict sign changes (negative products of
    /// consecutive samples).
    pub fn sign_changes(&self) -> &[(f64, f64)] {
        &self.sign_changes
    }

    /// Sample points where the solution touches zero without a strict
    /// crossing.
    pub fn zero_touches(&self) -> &[f64] {
        &self.zero_touches
    }

    /// Central-difference defect of the stored solution against the
    /// equation; a diagnostic, not an error bound.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// Solution value at `t` by linear interpolation.
    pub fn eval(&self, t: f64) -> Result<f64> {
        lookup_stored(&self.times, &self.values, t).ok_or(Error::Domain {
            what: "trajectory lookup".into(),
            t,
        })
    }
}

/// Number of strict sign changes of a trajectory.
pub fn count_sign_changes(trajectory: &Trajectory) -> usize {
    trajectory.sign_changes().len()
}

fn census(times: &[f64], values: &[f64]) -> (Vec<(f64, f64)>, Vec<f64>) {
    let mut changes = Vec::new();
    let mut touches = Vec::new();
    for j in 0..values.len() {
        if math::abs(values[j]) < ZERO_TOUCH {
            touches.push(times[j]);
        }
        if j + 1 < values.len() && values[j] * values[j + 1] < 0.0 {
            changes.push((times[j], times[j + 1]));
        }
    }
    (changes, touches)
}

fn lookup_stored(times: &[f64], values: &[f64], t: f64) -> Option<f64> {
    let n = times.len();
    if t < times[0] - 1e-12 || t > times[n - 1] + 1e-12 {
        return None;
    }
    let h = if n > 1 { times[1] - times[0] } else { 1.0 };
    let mut idx = (((t - times[0]) / h) as usize).min(n - 2);
    while idx > 0 && times[idx] > t {
        idx -= 1;
    }
    while idx + 2 < n && times[idx + 1] < t {
        idx += 1;
    }
    let (t0, t1) = (times[idx], times[idx + 1]);
    let frac = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
    Some(values[idx] + frac * (values[idx + 1] - values[idx]))
}

struct Integrator<'a> {
    problem: &'a DelayProblem,
    history: &'a HistoryFunction,
    t_start: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Integrator<'_> {
    /// Delayed state value; stage values are bridged linearly when a
    /// vanishing delay points between the last accepted node and the
    /// current stage.
    fn delayed(&self, tau: f64, t_stage: f64, y_stage: f64) -> Result<f64> {
        if tau < self.t_start {
            if tau < self.history.start() - 1e-12 {
                return Err(Error::HistoryTooShort {
                    needed: tau,
                    start: self.history.start(),
                });
            }
            return self.history.eval(tau.max(self.history.start()));
        }
        let t_last = self.times[self.times.len() - 1];
        if tau <= t_last {
            return lookup_stored(&self.times, &self.values, tau).ok_or(Error::Domain {
                what: "delayed lookup".into(),
                t: tau,
            });
        }
        // vanishing delay: interpolate toward the stage estimate
        let x_last = self.values[self.values.len() - 1];
        if t_stage <= t_last {
            return Ok(x_last);
        }
        let frac = ((tau - t_last) / (t_stage - t_last)).clamp(0.0, 1.0);
        Ok(x_last + frac * (y_stage - x_last))
    }

    fn rhs(&self, t: f64, y: f64) -> Result<f64> {
        let mut acc = 0.0;
        for term in self.problem.terms() {
            let p = term.coefficient.eval_side(t, Side::Right)?;
            let tau = term.argument.eval_side(t, Side::Right)?;
            acc -= p * self.delayed(tau, t, y)?;
        }
        Ok(acc)
    }
}

/// Integrates the delay problem from its base start to `t_end` with step
/// `h_sim`, taking the initial state and pre-start values from `history`.
pub fn integrate_delay(
    problem: &DelayProblem,
    history: &HistoryFunction,
    t_end: f64,
    h_sim: f64,
) -> Result<Trajectory> {
    let t_start = problem.base_start();
    if !(h_sim > 0.0) || !h_sim.is_finite() {
        return Err(Error::BadParameter(
            "simulation step must be positive".into(),
        ));
    }
    if !(t_end > t_start) {
        return Err(Error::BadParameter(
            "horizon must lie past the problem start".into(),
        ));
    }

    let mut integ = Integrator {
        problem,
        history,
        t_start,
        times: alloc::vec![t_start],
        values: alloc::vec![history.eval(t_start)?],
    };

    let total = t_end - t_start;
    let n_steps = math::ceil(total / h_sim).max(1.0) as usize;
    for step_idx in 0..n_steps {
        let t_n = integ.times[integ.times.len() - 1];
        let x_n = integ.values[integ.values.len() - 1];
        let h = (t_start + (step_idx + 1) as f64 * h_sim).min(t_end) - t_n;
        if h <= 0.0 {
            break;
        }
        let k1 = integ.rhs(t_n, x_n)?;
        let k2 = integ.rhs(t_n + 0.5 * h, x_n + 0.5 * h * k1)?;
        let k3 = integ.rhs(t_n + 0.5 * h, x_n + 0.5 * h * k2)?;
        let k4 = integ.rhs(t_n + h, x_n + h * k3)?;
        let x_next = x_n + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t_next = t_n + h;
        if !x_next.is_finite() {
            return Err(Error::NonFinite {
                what: "simulated state".into(),
                t: t_next,
            });
        }
        integ.times.push(t_next);
        integ.values.push(x_next);
    }

    let (sign_changes, zero_touches) = census(&integ.times, &integ.values);
    let max_residual = trajectory_defect(problem, history, &integ.times, &integ.values)?;
    Ok(Trajectory {
        times: integ.times,
        values: integ.values,
        step: h_sim,
        sign_changes,
        zero_touches,
        max_residual,
    })
}

/// Central-difference defect of a stored solution against the equation.
fn trajectory_defect(
    problem: &DelayProblem,
    history: &HistoryFunction,
    times: &[f64],
    values: &[f64],
) -> Result<f64> {
    let t_start = times[0];
    let mut worst = 0.0f64;
    for j in 1..times.len() - 1 {
        let t = times[j];
        let dx = (values[j + 1] - values[j - 1]) / (times[j + 1] - times[j - 1]);
        let mut rhs = 0.0;
        for term in problem.terms() {
            let p = term.coefficient.eval_side(t, Side::Right)?;
            let tau = term.argument.eval_side(t, Side::Right)?;
            let x_tau = if tau < t_start {
                history.eval(tau.max(history.start()))?
            } else {
                lookup_stored(times, values, tau).ok_or(Error::Domain {
                    what: "defect lookup".into(),
                    t: tau,
                })?
            };
            rhs += p * x_tau;
        }
        worst = worst.max(math::abs(dx + rhs));
    }
    Ok(worst)
}

/// Maximum residual `|x'(t) + Σ p_i(t) x(tau_i(t))|` of a closed-form
/// candidate solution over the interior grid nodes of its smooth pieces
/// (cell boundaries are excluded: the derivative is undefined there).
/// Delayed values left of the candidate's start come from `history`.
pub fn residual_check(
    problem: &DelayProblem,
    candidate: &PiecewiseCellFunction,
    history: &HistoryFunction,
    grid: &Grid,
) -> Result<f64> {
    let lo = grid.start();
    let hi = grid.end();
    // candidate breakpoints must sit on grid nodes
    let mut breaks = candidate.breakpoints_in(lo, hi);
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    for &b in &breaks {
        let (j, frac) = grid.bracket(b)?;
        let nodes = grid.nodes();
        let near = frac * (nodes[j + 1] - nodes[j]);
        let to_node = near.min(nodes[j + 1] - b).min((b - nodes[j]).max(0.0));
        if to_node > 1e-9 * math::abs(b).max(1.0) {
            return Err(Error::CellMisaligned { t: b });
        }
    }
    let is_breakpoint = |t: f64| {
        let tol = 1e-9 * math::abs(t).max(1.0);
        breaks
            .binary_search_by(|&b| b.partial_cmp(&t).expect("finite"))
            .is_ok()
            || breaks.iter().any(|&b| math::abs(b - t) <= tol)
    };

    let x_at = |s: f64| -> Result<f64> {
        if s < candidate.base_start() {
            history.eval(s)
        } else {
            candidate.eval(s)
        }
    };

    let mut worst = 0.0f64;
    for &t in grid.nodes() {
        if t <= lo || t >= hi || is_breakpoint(t) {
            continue;
        }
        let dx = candidate.derivative_side(t, Side::Right)?;
        let mut rhs = 0.0;
        for term in problem.terms() {
            let p = term.coefficient.eval_side(t, Side::Right)?;
            let tau = term.argument.eval_side(t, Side::Right)?;
            rhs += p * x_at(tau)?;
        }
        worst = worst.max(math::abs(dx + rhs));
    }
    Ok(worst)
}

/// Advanced problems have no forward initial-value formulation; callers
/// routing both problem kinds through one entry point use this to produce
/// the canonical refusal.
pub fn reject_advanced() -> Error {
    Error::AdvancedNotSimulable
}
