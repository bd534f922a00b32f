//! Criterion evaluation for delay problems.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::envelope::{combine_max, running_sup, EnvelopeFunction};
use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::kernel::{build_kernel_delay, KernelTables};
use crate::math;
use crate::piecewise::Side;
use crate::problem::{deviation_bounded, DelayProblem};
use crate::table::{cumulative, integrate_indexed, CumulativeTable};

use super::{
    alpha_threshold, compare_to_threshold, corollary_annotations, liminf_estimate, limsup_estimate,
    CriterionId, CriterionReport, EvalConfig, TailEstimate, Verdict, EXP_CLAMP, INV_E,
};

const NO_BRACKET: u32 = u32::MAX;

/// Grid interval index + fraction of a precomputed lookup point, or a
/// sentinel when the point lies outside the grid.
type Bracket = (u32, f64);

/// Prepared evaluation context for one delay problem: shared grid,
/// envelopes, coefficient-mass table, kernel tables and per-node lookup
/// caches. Construction does everything expensive once; the per-criterion
/// methods then sample their functionals over the evaluation tail.
///
/// The problem is assumed to have passed [`crate::problem::validate_delay`].
pub struct DelayAnalysis {
    problem: DelayProblem,
    config: EvalConfig,
    grid: Arc<Grid>,
    sum_p: CumulativeTable,
    term_envelopes: Vec<EnvelopeFunction>,
    envelope: EnvelopeFunction,
    kernels: KernelTables,
    /// One-sided coefficient and argument samples, `m * n`, term-major.
    p_side: [Vec<f64>; 2],
    arg_side: [Vec<f64>; 2],
    arg_bracket: [Vec<Bracket>; 2],
    /// Bracket of `g(t_j)` per node.
    env_bracket: Vec<Bracket>,
    /// Node index range `[lo, hi)` of the evaluation tail.
    eval_range: (usize, usize),
    alpha: f64,
    max_delay_span: f64,
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Right => 0,
        Side::Left => 1,
    }
}

fn bracket_of(grid: &Grid, x: f64) -> Bracket {
    match grid.bracket(x) {
        Ok((j, frac)) => (j as u32, frac),
        Err(_) => (NO_BRACKET, 0.0),
    }
}

fn interp(table: &CumulativeTable, bracket: Bracket, what: &str) -> Result<f64> {
    if bracket.0 == NO_BRACKET {
        return Err(Error::Range {
            what: what.into(),
            t: f64::NAN,
        });
    }
    let j = bracket.0 as usize;
    let v = table.values();
    Ok(v[j] + bracket.1 * (v[j + 1] - v[j]))
}

impl DelayAnalysis {
    pub fn new(problem: DelayProblem, config: EvalConfig) -> Result<Self> {
        config.validate()?;
        let (t0, t1) = config.window;
        // Envelopes and kernel tables always accumulate from the problem's
        // base start, regardless of where the analysis window begins.
        let grid = grid::build_grid(
            &problem.functions(),
            (problem.base_start(), t1),
            config.step,
            0.0,
        )?;

        let nodes = grid.nodes();
        let n = nodes.len();
        let m = problem.term_count();

        let mut p_side = [alloc::vec![0.0; m * n], alloc::vec![0.0; m * n]];
        let mut arg_side = [alloc::vec![0.0; m * n], alloc::vec![0.0; m * n]];
        let mut arg_bracket = [
            alloc::vec![(NO_BRACKET, 0.0); m * n],
            alloc::vec![(NO_BRACKET, 0.0); m * n],
        ];
        for (i, term) in problem.terms().iter().enumerate() {
            for (j, &t) in nodes.iter().enumerate() {
                for side in [Side::Right, Side::Left] {
                    let s = side_index(side);
                    p_side[s][i * n + j] = term.coefficient.eval_side(t, side)?;
                    let a = term.argument.eval_side(t, side)?;
                    arg_side[s][i * n + j] = a;
                    arg_bracket[s][i * n + j] = bracket_of(&grid, a);
                }
            }
        }

        let term_envelopes: Vec<EnvelopeFunction> = problem
            .terms()
            .iter()
            .map(|term| running_sup(&term.argument, &grid))
            .collect::<Result<_>>()?;
        let envelope = combine_max(&term_envelopes)?;
        let env_bracket: Vec<Bracket> = envelope
            .values()
            .iter()
            .map(|&g| bracket_of(&grid, g))
            .collect();

        let sum_p = cumulative(&grid, |t, side| problem.coefficient_sum(t, side))?;
        let kernels = build_kernel_delay(&problem, &grid, config.r_max)?;
        let max_delay_span = problem.max_delay_span(&grid)?;

        // Evaluation tail: the last two hint-periods (the estimators use the
        // final one), or the trailing half of the analysis window.
        let eval_lo = match config.period_hint {
            Some(p) => t0.max(t1 - 2.0 * p),
            None => t0.max(0.5 * (t0 + t1)),
        };
        let warm_up_end = problem.base_start() + max_delay_span;
        if eval_lo < warm_up_end - 1e-9 {
            return Err(Error::BadParameter(alloc::format!(
                "evaluation window starts at {eval_lo} inside the kernel warm-up region \
                 (ends at {warm_up_end}); enlarge the analysis window"
            )));
        }
        let eval_range = grid.node_range(eval_lo, t1);
        if eval_range.1 - eval_range.0 < 2 {
            return Err(Error::TooFewSamples {
                have: eval_range.1 - eval_range.0,
                need: 2,
            });
        }

        let mut analysis = DelayAnalysis {
            problem,
            config,
            grid,
            sum_p,
            term_envelopes,
            envelope,
            kernels,
            p_side,
            arg_side,
            arg_bracket,
            env_bracket,
            eval_range,
            alpha: 0.0,
            max_delay_span,
        };
        let alpha_samples = analysis.coefficient_mass_samples()?;
        analysis.alpha = liminf_estimate(&alpha_samples, analysis.config.period_hint)?.value;
        Ok(analysis)
    }

    pub fn problem(&self) -> &DelayProblem {
        &self.problem
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn config(&self) -> &EvalConfig {
        &self.config
    }

    pub fn kernels(&self) -> &KernelTables {
        &self.kernels
    }

    pub fn envelope(&self) -> &EnvelopeFunction {
        &self.envelope
    }

    pub fn term_envelopes(&self) -> &[EnvelopeFunction] {
        &self.term_envelopes
    }

    pub fn max_delay_span(&self) -> f64 {
        self.max_delay_span
    }

    /// Sampled node times of the evaluation tail.
    pub fn eval_nodes(&self) -> &[f64] {
        &self.grid.nodes()[self.eval_range.0..self.eval_range.1]
    }

    /// `alpha = liminf ∫_{g(t)}^{t} sum_i p_i`, the coefficient mass over
    /// the envelope gap.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Samples of `∫_{g(t)}^{t} sum_i p_i` over the evaluation tail.
    pub fn coefficient_mass_samples(&self) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(self.eval_range.1 - self.eval_range.0);
        for j in self.eval_range.0..self.eval_range.1 {
            let t = self.grid.nodes()[j];
            let mass = self.sum_p.value_at_node(j)
                - interp(&self.sum_p, self.env_bracket[j], "envelope mass")?;
            out.push((t, mass.max(0.0)));
        }
        Ok(out)
    }

    /// `f_r(t_j) = ∫_{g(t_j)}^{t_j} sum_i p_i(ζ) a_r(anchor, tau_i(ζ)) dζ`
    /// with the kernel anchored at `g(t_j)` (fixed) or at `g(ζ)` (moving).
    fn kernel_window_value(&self, r: u32, jt: usize, moving_anchor: bool) -> Result<f64> {
        let table = self.kernels.weight_table(r)?;
        let n = self.grid.len();
        let t = self.grid.nodes()[jt];
        let gt = self.envelope.value_at_node(jt);
        if gt >= t {
            return Ok(0.0);
        }
        let w_fixed = if moving_anchor {
            0.0
        } else {
            table.value_at(gt)?
        };
        let mut node_val = |j: usize, side: Side| -> Result<f64> {
            let s = side_index(side);
            let anchor = if moving_anchor {
                interp(table, self.env_bracket[j], "kernel anchor")?
            } else {
                w_fixed
            };
            let mut acc = 0.0;
            for i in 0..self.problem.term_count() {
                let w_dev = interp(table, self.arg_bracket[s][i * n + j], "kernel deviation")?;
                acc += self.p_side[s][i * n + j] * math::exp((anchor - w_dev).min(EXP_CLAMP));
            }
            Ok(acc)
        };
        let mut point_val = |z: f64, side: Side| -> Result<f64> {
            let anchor = if moving_anchor {
                table.value_at(self.envelope.eval(z)?)?
            } else {
                w_fixed
            };
            let mut acc = 0.0;
            for term in self.problem.terms() {
                let p = term.coefficient.eval_side(z, side)?;
                let dev = term.argument.eval_side(z, side)?;
                if !self.grid.contains(dev) {
                    return Err(Error::Range {
                        what: "kernel deviation".into(),
                        t: dev,
                    });
                }
                acc += p * math::exp((anchor - table.value_at(dev)?).min(EXP_CLAMP));
            }
            Ok(acc)
        };
        integrate_indexed(&self.grid, gt, t, &mut node_val, &mut point_val)
    }

    /// Highest kernel level that is both requested and representable.
    pub fn effective_r_max(&self) -> u32 {
        self.config.r_max.min(self.kernels.r_max())
    }

    fn kernel_window_samples(&self, r: u32, moving_anchor: bool) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(self.eval_range.1 - self.eval_range.0);
        for j in self.eval_range.0..self.eval_range.1 {
            out.push((
                self.grid.nodes()[j],
                self.kernel_window_value(r, j, moving_anchor)?,
            ));
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_report(
        &self,
        id: CriterionId,
        iteration: Option<u32>,
        samples: Vec<(f64, f64)>,
        est: TailEstimate,
        threshold: Option<f64>,
        alpha: Option<f64>,
        precondition_ok: bool,
    ) -> CriterionReport {
        let verdict = match threshold {
            _ if !precondition_ok => Verdict::PreconditionFailed,
            None => Verdict::PreconditionFailed,
            Some(th) => compare_to_threshold(est.value, th, self.config.margin),
        };
        let mut annotations = Vec::new();
        if verdict == Verdict::Oscillatory {
            annotations.extend(corollary_annotations(true));
        }
        if est.window_limited {
            annotations.push("window-limited estimate (no period hint)".into());
        }
        CriterionReport {
            id,
            iteration,
            samples,
            estimate: est.value,
            threshold,
            margin: threshold.map(|th| est.value - th),
            verdict,
            alpha,
            annotations,
            window_limited: est.window_limited,
        }
    }

    /// Iterated limsup test at level `r`: oscillatory when
    /// `limsup ∫_{g(t)}^{t} Σ p_i(ζ) a_r(g(t), tau_i(ζ)) dζ > 1`.
    pub fn iterated_limsup(&self, r: u32) -> Result<CriterionReport> {
        let samples = self.kernel_window_samples(r, false)?;
        let est = limsup_estimate(&samples, self.config.period_hint)?;
        Ok(self.finish_report(
            CriterionId::IteratedLimsupDelay,
            Some(r),
            samples,
            est,
            Some(1.0),
            None,
            true,
        ))
    }

    /// Same functional, threshold lowered through `alpha`; requires
    /// `0 < alpha <= 1/e`.
    pub fn iterated_limsup_alpha(&self, r: u32) -> Result<CriterionReport> {
        let samples = self.kernel_window_samples(r, false)?;
        let est = limsup_estimate(&samples, self.config.period_hint)?;
        let threshold = alpha_threshold(self.alpha);
        Ok(self.finish_report(
            CriterionId::IteratedLimsupDelayAlpha,
            Some(r),
            samples,
            est,
            threshold,
            Some(self.alpha),
            threshold.is_some(),
        ))
    }

    /// Iterated liminf test at level `r`: oscillatory when
    /// `liminf ∫_{g(t)}^{t} Σ p_i(ζ) a_r(g(ζ), tau_i(ζ)) dζ > 1/e`
    /// (kernel anchored at the moving point `g(ζ)`).
    pub fn iterated_liminf(&self, r: u32) -> Result<CriterionReport> {
        let samples = self.kernel_window_samples(r, true)?;
        let est = liminf_estimate(&samples, self.config.period_hint)?;
        Ok(self.finish_report(
            CriterionId::IteratedLiminfDelay,
            Some(r),
            samples,
            est,
            Some(INV_E),
            None,
            true,
        ))
    }

    /// Classical liminf test over `[tau_max(t), t]` against 1/e.
    pub fn classical_liminf(&self) -> Result<CriterionReport> {
        let n = self.grid.len();
        let mut samples = Vec::with_capacity(self.eval_range.1 - self.eval_range.0);
        for j in self.eval_range.0..self.eval_range.1 {
            let t = self.grid.nodes()[j];
            let mut tau_max = f64::NEG_INFINITY;
            let mut bracket = (NO_BRACKET, 0.0);
            for i in 0..self.problem.term_count() {
                let a = self.arg_side[0][i * n + j];
                if a > tau_max {
                    tau_max = a;
                    bracket = self.arg_bracket[0][i * n + j];
                }
            }
            let v = self.sum_p.value_at_node(j) - interp(&self.sum_p, bracket, "tau_max mass")?;
            samples.push((t, v));
        }
        let est = liminf_estimate(&samples, self.config.period_hint)?;
        Ok(self.finish_report(
            CriterionId::LaddeLiminf,
            None,
            samples,
            est,
            Some(INV_E),
            None,
            true,
        ))
    }

    /// Pointwise weighted-delay liminf test `Σ p_i(t)(t - tau_i(t)) > 1/e`;
    /// requires structurally bounded delays.
    pub fn weighted_pointwise(&self) -> Result<CriterionReport> {
        let n = self.grid.len();
        let bounded = self
            .problem
            .terms()
            .iter()
            .all(|t| deviation_bounded(&t.argument));
        let mut samples = Vec::with_capacity(self.eval_range.1 - self.eval_range.0);
        for j in self.eval_range.0..self.eval_range.1 {
            let t = self.grid.nodes()[j];
            let mut v = 0.0;
            for i in 0..self.problem.term_count() {
                v += self.p_side[0][i * n + j] * (t - self.arg_side[0][i * n + j]);
            }
            samples.push((t, v));
        }
        let est = liminf_estimate(&samples, self.config.period_hint)?;
        Ok(self.finish_report(
            CriterionId::HuntYorke,
            None,
            samples,
            est,
            Some(INV_E),
            None,
            bounded,
        ))
    }

    /// Full delay suite: classical tests once, iterated tests for every
    /// representable `r <= r_max`, plus the single-delay aliases when
    /// `m = 1`.
    pub fn all_reports(&self) -> Result<Vec<CriterionReport>> {
        let mut out = alloc::vec![self.classical_liminf()?, self.weighted_pointwise()?];
        for r in 1..=self.effective_r_max() {
            out.push(self.iterated_limsup(r)?);
            out.push(self.iterated_limsup_alpha(r)?);
            out.push(self.iterated_liminf(r)?);
        }
        let aliases = single_delay_aliases(&out, self.problem.term_count());
        out.extend(aliases);
        Ok(out)
    }
}

/// The historical single-delay limsup tests are the `m = 1`, `r = 1` cases
/// of the iterated tests; when the problem has one term, their reports are
/// re-issued under the historical identifiers.
pub fn single_delay_aliases(reports: &[CriterionReport], m: usize) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    if m != 1 {
        return out;
    }
    let pairs = [
        (
            CriterionId::IteratedLimsupDelay,
            CriterionId::BravermanKarpuz,
        ),
        (
            CriterionId::IteratedLimsupDelayAlpha,
            CriterionId::StavroulakisSingleDelay,
        ),
    ];
    for (src, dst) in pairs {
        if let Some(base) = reports
            .iter()
            .find(|r| r.id == src && r.iteration == Some(1))
        {
            let mut report = base.clone();
            report.id = dst;
            report.annotations.push(alloc::format!(
                "alias: {} specialized to m = 1, r = 1",
                src.code()
            ));
            out.push(report);
        }
    }
    out
}
