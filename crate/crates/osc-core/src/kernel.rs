//! Iterated exponential decay kernels.
//!
//! For a positive solution of the delay equation, repeated Grönwall
//! estimates give the decay bounds `x(t) a_r(t,s) <= x(s)` for `s <= t`,
//! where
//!
//! ```text
//! a_1(t,s) = exp{ ∫_s^t Σ_i p_i(ζ) dζ }
//! a_{r+1}(t,s) = exp{ ∫_s^t Σ_i p_i(ζ) a_r(ζ, tau_i(ζ)) dζ }
//! ```
//!
//! and dually `b_r` for advanced equations with `sigma_i` and forward
//! integration. Evaluated naively these nests are exponential in `r`; but
//! the integrand of level `r+1` depends on `ζ` alone, so each level is the
//! exponential of a difference of one cumulative weight table:
//!
//! ```text
//! a_r(t,s) = exp(W_r(t) - W_r(s)),   W_r(u) = ∫_base^u w_r,
//! w_1 = Σ p_i,   w_{r+1}(ζ) = Σ_i p_i(ζ) exp(W_r(ζ) - W_r(tau_i(ζ))).
//! ```
//!
//! One cumulative pass per level gives all of them in `O(r N m)`. The
//! literal nested-quadrature evaluation is kept in the test suite as an
//! independent oracle.
//!
//! Near the grid start the weights reference `W_r` below the table; those
//! lookups are clamped to the grid start, so `W_r` is only exact one
//! maximal delay span per level past the base point. Criterion evaluation
//! windows must stay clear of that warm-up region (enforced by the
//! criteria module); `eval_a`/`eval_b` reject arguments outside the table
//! outright.
//!
//! For strongly oscillatory problems the weight iteration has no finite
//! fixed point and blows up doubly exponentially in `r`; the level stack
//! is capped at the last representable level and the divergence point is
//! reported (see [`KernelTables::diverged_at`]), mirroring the divergence
//! tag of the autonomous iterates.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math;
use crate::piecewise::Side;
use crate::problem::{AdvancedProblem, DelayProblem, Term};
use crate::table::{cumulative_sampled, CumulativeTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `a_r(t, s)`, `s <= t` (delay).
    Delay,
    /// `b_r(t, s)`, `s >= t` (advanced).
    Advanced,
}

/// Cumulative weight tables `W_1..W_r` (delay) or `V_1..V_r` (advanced).
#[derive(Debug, Clone)]
pub struct KernelTables {
    kind: KernelKind,
    levels: Vec<CumulativeTable>,
    grid: Arc<Grid>,
    diverged_at: Option<u32>,
}

/// Weight samples above this stop the level stack: every further level is
/// certain to overflow, and the criteria at the preceding level already
/// exceed their thresholds by hundreds of orders of magnitude.
const WEIGHT_CAP: f64 = 1e150;

fn build_tables(
    terms: &[Term],
    grid: &Arc<Grid>,
    r_max: u32,
    kind: KernelKind,
) -> Result<KernelTables> {
    if r_max < 1 {
        return Err(Error::BadParameter("r_max must be at least 1".into()));
    }
    let nodes = grid.nodes();
    let n = nodes.len();
    let m = terms.len();

    // One-sided node samples of every coefficient and argument.
    let mut p_r = alloc::vec![0.0; m * n];
    let mut p_l = alloc::vec![0.0; m * n];
    let mut arg_r = alloc::vec![0.0; m * n];
    let mut arg_l = alloc::vec![0.0; m * n];
    for (i, term) in terms.iter().enumerate() {
        for (j, &t) in nodes.iter().enumerate() {
            p_r[i * n + j] = term.coefficient.eval_side(t, Side::Right)?;
            p_l[i * n + j] = term.coefficient.eval_side(t, Side::Left)?;
            arg_r[i * n + j] = term.argument.eval_side(t, Side::Right)?;
            arg_l[i * n + j] = term.argument.eval_side(t, Side::Left)?;
        }
    }

    let clamp = |x: f64| x.clamp(grid.start(), grid.end());

    let mut levels: Vec<CumulativeTable> = Vec::with_capacity(r_max as usize);
    let mut w_right = alloc::vec![0.0; n];
    let mut w_left = alloc::vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            w_right[j] += p_r[i * n + j];
            w_left[j] += p_l[i * n + j];
        }
    }
    levels.push(cumulative_sampled(grid, &w_right, &w_left)?);

    let mut diverged_at = None;
    'levels: for level in 1..r_max {
        let prev = levels.last().expect("at least one level");
        for j in 0..n {
            let here = prev.value_at_node(j);
            let mut wr = 0.0;
            let mut wl = 0.0;
            for i in 0..m {
                let dev_r = prev.value_at(clamp(arg_r[i * n + j]))?;
                let dev_l = prev.value_at(clamp(arg_l[i * n + j]))?;
                match kind {
                    KernelKind::Delay => {
                        wr += p_r[i * n + j] * math::exp(here - dev_r);
                        wl += p_l[i * n + j] * math::exp(here - dev_l);
                    }
                    KernelKind::Advanced => {
                        wr += p_r[i * n + j] * math::exp(dev_r - here);
                        wl += p_l[i * n + j] * math::exp(dev_l - here);
                    }
                }
            }
            if !wr.is_finite() || !wl.is_finite() || wr > WEIGHT_CAP || wl > WEIGHT_CAP {
                diverged_at = Some(level + 1);
                break 'levels;
            }
            w_right[j] = wr;
            w_left[j] = wl;
        }
        levels.push(cumulative_sampled(grid, &w_right, &w_left)?);
    }

    Ok(KernelTables {
        kind,
        levels,
        grid: Arc::clone(grid),
        diverged_at,
    })
}

/// Builds `W_1..W_{r_max}` for a delay problem. The grid must cover the
/// analysis window; argument values below the grid start are clamped during
/// construction (warm-up region, see module docs).
pub fn build_kernel_delay(
    problem: &DelayProblem,
    grid: &Arc<Grid>,
    r_max: u32,
) -> Result<KernelTables> {
    build_tables(problem.terms(), grid, r_max, KernelKind::Delay)
}

/// Builds `V_1..V_{r_max}` for an advanced problem. The grid must extend
/// far enough past the analysis window to cover the deviated arguments of
/// every level (the criteria module extends by `(r_max + 1) * Δ_max`).
pub fn build_kernel_advanced(
    problem: &AdvancedProblem,
    grid: &Arc<Grid>,
    r_max: u32,
) -> Result<KernelTables> {
    build_tables(problem.terms(), grid, r_max, KernelKind::Advanced)
}

impl KernelTables {
    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// Number of levels actually built; smaller than the requested `r_max`
    /// when the weight iteration diverged.
    pub fn r_max(&self) -> u32 {
        self.levels.len() as u32
    }

    /// First iteration whose weights overflowed, if any. Divergence means
    /// the previous level's criteria already exceed every threshold by a
    /// huge factor, so the stack is simply capped there.
    pub fn diverged_at(&self) -> Option<u32> {
        self.diverged_at
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// The cumulative weight table of level `r` (1-based), e.g. for CSV
    /// dumps of the weight curves.
    pub fn weight_table(&self, r: u32) -> Result<&CumulativeTable> {
        match self.levels.get(r.wrapping_sub(1) as usize) {
            Some(table) => Ok(table),
            None => match self.diverged_at {
                Some(iteration) if r >= iteration => Err(Error::Diverged { iteration }),
                _ => Err(Error::BadParameter(alloc::format!(
                    "kernel level {r} not built"
                ))),
            },
        }
    }

    fn check_range(&self, x: f64) -> Result<f64> {
        if !self.grid.contains(x) {
            return Err(Error::Range {
                what: "kernel evaluation".into(),
                t: x,
            });
        }
        Ok(x)
    }

    /// `a_r(t, s) = exp(W_r(t) - W_r(s))` for `s <= t`.
    pub fn eval_a(&self, r: u32, t: f64, s: f64) -> Result<f64> {
        debug_assert_eq!(self.kind, KernelKind::Delay);
        if s > t + 1e-12 * math::abs(t).max(1.0) {
            return Err(Error::ArgumentOrder { left: t, right: s });
        }
        let table = self.weight_table(r)?;
        Ok(math::exp(
            table.value_at(self.check_range(t)?)? - table.value_at(self.check_range(s)?)?,
        ))
    }

    /// `b_r(t, s) = exp(V_r(s) - V_r(t))` for `s >= t`.
    pub fn eval_b(&self, r: u32, t: f64, s: f64) -> Result<f64> {
        debug_assert_eq!(self.kind, KernelKind::Advanced);
        if s < t - 1e-12 * math::abs(t).max(1.0) {
            return Err(Error::ArgumentOrder { left: t, right: s });
        }
        let table = self.weight_table(r)?;
        Ok(math::exp(
            table.value_at(self.check_range(s)?)? - table.value_at(self.check_range(t)?)?,
        ))
    }
}

/// Kernel iterates of the autonomous unit-delay equation
/// `x' + p x(t-1) = 0`: here `a_r(t, t-1) = λ_r` with
///
/// ```text
/// λ_0 = 1,   λ_{r+1} = exp(p λ_r).
/// ```
///
/// For `p <= 1/e` the sequence converges to the smaller root of
/// `λ = e^{p λ}`; past the threshold it blows up, which is reported as
/// divergence instead of an overflowed float.
#[derive(Debug, Clone)]
pub struct AutonomousIterate {
    coefficient: f64,
    lambdas: Vec<f64>,
    diverged_at: Option<u32>,
}

/// Exponent above which one more iterate would overflow.
const DIVERGENCE_EXPONENT: f64 = 700.0;

impl AutonomousIterate {
    pub fn compute(p: f64, r_max: u32) -> Result<Self> {
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::BadParameter(
                "autonomous coefficient must be >= 0".into(),
            ));
        }
        let mut lambdas = Vec::with_capacity(r_max as usize);
        let mut diverged_at = None;
        let mut lam = 1.0f64;
        for r in 1..=r_max {
            if p * lam > DIVERGENCE_EXPONENT {
                diverged_at = Some(r);
                break;
            }
            lam = math::exp(p * lam);
            lambdas.push(lam);
        }
        Ok(AutonomousIterate {
            coefficient: p,
            lambdas,
            diverged_at,
        })
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn diverged_at(&self) -> Option<u32> {
        self.diverged_at
    }

    /// `λ_r`; `r = 0` gives 1.
    pub fn lambda(&self, r: u32) -> Result<f64> {
        if r == 0 {
            return Ok(1.0);
        }
        match self.lambdas.get(r as usize - 1) {
            Some(&v) => Ok(v),
            None => Err(Error::Diverged {
                iteration: self.diverged_at.unwrap_or(self.lambdas.len() as u32 + 1),
            }),
        }
    }
}

/// Convenience: `λ_r` for coefficient `p`.
pub fn autonomous_lambda(p: f64, r: u32) -> Result<f64> {
    AutonomousIterate::compute(p, r)?.lambda(r)
}
