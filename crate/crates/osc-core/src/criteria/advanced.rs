//! Criterion evaluation for advanced problems.
//!
//! Mirrors the delay side with forward displacement: envelopes are running
//! infima `rho_i(t) = inf_{s>=t} sigma_i(s)`, kernels are the forward
//! tables `V_r`, and every functional integrates over `[t, rho(t)]`. There
//! is no warm-up transient at the window start, but level-`r` kernels need
//! headroom above the window: the grid is extended by `(r_max + 1)` advance
//! bounds so that `V_r` is exact wherever the evaluation tail reads it.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::envelope::{combine_min, running_inf, EnvelopeFunction};
use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::kernel::{build_kernel_advanced, KernelTables};
use crate::math;
use crate::piecewise::Side;
use crate::problem::{deviation_bounded, AdvancedProblem};
use crate::table::{cumulative, integrate_indexed, CumulativeTable};

use super::{
    alpha_threshold, compare_to_threshold, corollary_annotations, liminf_estimate, limsup_estimate,
    CriterionId, CriterionReport, EvalConfig, TailEstimate, Verdict, EXP_CLAMP, INV_E,
};

const NO_BRACKET: u32 = u32::MAX;

type Bracket = (u32, f64);

/// Prepared evaluation context for one advanced problem. The problem is
/// assumed to have passed [`crate::problem::validate_advanced`].
pub struct AdvancedAnalysis {
    problem: AdvancedProblem,
    config: EvalConfig,
    grid: Arc<Grid>,
    sum_p: CumulativeTable,
    term_envelopes: Vec<EnvelopeFunction>,
    envelope: EnvelopeFunction,
    kernels: KernelTables,
    p_side: [Vec<f64>; 2],
    arg_side: [Vec<f64>; 2],
    arg_bracket: [Vec<Bracket>; 2],
    /// Bracket of the combined envelope `rho(t_j)` per node.
    env_bracket: Vec<Bracket>,
    /// Brackets of the per-term envelopes `rho_i(t_j)`.
    term_env_bracket: Vec<Vec<Bracket>>,
    eval_range: (usize, usize),
    alpha: f64,
    advance_bound: f64,
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

impl AdvancedAnalysis {
    pub fn new(problem: AdvancedProblem, config: EvalConfig) -> Result<Self> {
        config.validate()?;
        let (t0, t1) = config.window;
        let base = problem.base_start();

        // Probe pass for the advance bound, then the extended working grid.
        let probe = grid::build_grid(&problem.functions(), (base, t1), config.step.max(1e-3), 0.0)?;
        let advance_bound = problem.advance_bound(&probe)?;
        if !advance_bound.is_finite() {
            return Err(Error::BadParameter("advance bound is not finite".into()));
        }
        let margin = (config.r_max as f64 + 1.0) * advance_bound;
        let grid = grid::build_grid(&problem.functions(), (base, t1), config.step, margin)?;

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
                    // clamp the top band: lookups there only happen beyond
                    // the exactness zone the evaluation tail never reads
                    arg_bracket[s][i * n + j] = bracket_of(&grid, a.min(grid.end()));
                }
            }
        }

        let term_envelopes: Vec<EnvelopeFunction> = problem
            .terms()
            .iter()
            .map(|term| running_inf(&term.argument, &grid))
            .collect::<Result<_>>()?;
        let envelope = combine_min(&term_envelopes)?;
        let env_bracket: Vec<Bracket> = envelope
            .values()
            .iter()
            .map(|&v| bracket_of(&grid, v.min(grid.end())))
            .collect();
        let term_env_bracket: Vec<Vec<Bracket>> = term_envelopes
            .iter()
            .map(|e| {
                e.values()
                    .iter()
                    .map(|&v| bracket_of(&grid, v.min(grid.end())))
                    .collect()
            })
            .collect();

        let sum_p = cumulative(&grid, |t, side| problem.coefficient_sum(t, side))?;
        let kernels = build_kernel_advanced(&problem, &grid, config.r_max)?;

        let eval_lo = match config.period_hint {
            Some(p) => t0.max(t1 - 2.0 * p),
            None => t0.max(0.5 * (t0 + t1)),
        };
        let eval_range = grid.node_range(eval_lo.max(base), t1);
        if eval_range.1 - eval_range.0 < 2 {
            return Err(Error::TooFewSamples {
                have: eval_range.1 - eval_range.0,
                need: 2,
            });
        }

        let mut analysis = AdvancedAnalysis {
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
            term_env_bracket,
            eval_range,
            alpha: 0.0,
            advance_bound,
        };
        let alpha_samples = analysis.coefficient_mass_samples()?;
        analysis.alpha = liminf_estimate(&alpha_samples, analysis.config.period_hint)?.value;
        Ok(analysis)
    }

    pub fn problem(&self) -> &AdvancedProblem {
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

    pub fn advance_bound(&self) -> f64 {
        self.advance_bound
    }

    pub fn eval_nodes(&self) -> &[f64] {
        &self.grid.nodes()[self.eval_range.0..self.eval_range.1]
    }

    /// `alpha = liminf ∫_{t}^{rho(t)} sum_i p_i`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Samples of `∫_{t}^{rho(t)} sum_i p_i` over the evaluation tail.
    pub fn coefficient_mass_samples(&self) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(self.eval_range.1 - self.eval_range.0);
        for j in self.eval_range.0..self.eval_range.1 {
            let t = self.grid.nodes()[j];
            let mass = interp(&self.sum_p, self.env_bracket[j], "envelope mass")?
                - self.sum_p.value_at_node(j);
            out.push((t, mass.max(0.0)));
        }
        Ok(out)
    }

    /// `f_r(t_j) = ∫_{t_j}^{rho(t_j)} sum_i p_i(ζ) b_r(anchor, sigma_i(ζ)) dζ`
    /// with the kernel anchored at `rho(t_j)` (fixed) or `rho(ζ)` (moving).
    fn kernel_window_value(&self, r: u32, jt: usize, moving_anchor: bool) -> Result<f64> {
        let table = self.kernels.weight_table(r)?;
        let n = self.grid.len();
        let t = self.grid.nodes()[jt];
        let rt = self.envelope.value_at_node(jt);
        if rt <= t {
            return Ok(0.0);
        }
        let v_fixed = if moving_anchor {
            0.0
        } else {
            table.value_at(rt.min(self.grid.end()))?
        };
        let mut node_val = |j: usize, side: Side| -> Result<f64> {
            let s = side_index(side);
            let anchor = if moving_anchor {
                interp(table, self.env_bracket[j], "kernel anchor")?
            } else {
                v_fixed
            };
            let mut acc = 0.0;
            for i in 0..self.problem.term_count() {
                let v_dev = interp(table, self.arg_bracket[s][i * n + j], "kernel deviation")?;
                acc += self.p_side[s][i * n + j] * math::exp((v_dev - anchor).min(EXP_CLAMP));
            }
            Ok(acc)
        };
        let mut point_val = |z: f64, side: Side| -> Result<f64> {
            let anchor = if moving_anchor {
                table.value_at(self.envelope.eval(z)?)?
            } else {
                v_fixed
            };
            let mut acc = 0.0;
            for term in self.problem.terms() {
                let p = term.coefficient.eval_side(z, side)?;
                let dev = term.argument.eval_side(z, side)?;
                acc += p * math::exp(
                    (table.value_at(dev.min(self.grid.end()))? - anchor).min(EXP_CLAMP),
                );
            }
            Ok(acc)
        };
        integrate_indexed(&self.grid, t, rt, &mut node_val, &mut point_val)
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

    /// Functional of the per-envelope tests: the exponent weighs the whole
    /// coefficient mass between `rho_i(t)` and `sigma_i(s)`.
    fn per_envelope_value(&self, jt: usize) -> Result<f64> {
        let n = self.grid.len();
        let t = self.grid.nodes()[jt];
        let rt = self.envelope.value_at_node(jt);
        if rt <= t {
            return Ok(0.0);
        }
        let m = self.problem.term_count();
        let mut anchors = Vec::with_capacity(m);
        for i in 0..m {
            anchors.push(interp(
                &self.sum_p,
                self.term_env_bracket[i][jt],
                "per-term envelope",
            )?);
        }
        let rho_i_vals: Vec<f64> = (0..m)
            .map(|i| self.term_envelopes[i].value_at_node(jt))
            .collect();
        let mut node_val = |j: usize, side: Side| -> Result<f64> {
            let s = side_index(side);
            let mut acc = 0.0;
            for i in 0..m {
                let sigma = self.arg_side[s][i * n + j];
                if sigma < rho_i_vals[i] - 1e-9 {
                    return Err(Error::EnvelopeOrder {
                        t: self.grid.nodes()[j],
                        detail: alloc::format!(
                            "sigma_{i} = {sigma} fell below its envelope value {}",
                            rho_i_vals[i]
                        ),
                    });
                }
                let f_dev = interp(&self.sum_p, self.arg_bracket[s][i * n + j], "mass at sigma")?;
                acc += self.p_side[s][i * n + j] * math::exp((f_dev - anchors[i]).min(EXP_CLAMP));
            }
            Ok(acc)
        };
        let mut point_val = |z: f64, side: Side| -> Result<f64> {
            let mut acc = 0.0;
            for (i, term) in self.problem.terms().iter().enumerate() {
                let p = term.coefficient.eval_side(z, side)?;
                let sigma = term.argument.eval_side(z, side)?;
                let f_dev = self.sum_p.value_at(sigma.min(self.grid.end()))?;
                acc += p * math::exp((f_dev - anchors[i]).min(EXP_CLAMP));
            }
            Ok(acc)
        };
        integrate_indexed(&self.grid, t, rt, &mut node_val, &mut point_val)
    }

    fn per_envelope_samples(&self) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(self.eval_range.1 - self.eval_range.0);
        for j in self.eval_range.0..self.eval_range.1 {
            out.push((self.grid.nodes()[j], self.per_envelope_value(j)?));
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
            annotations.extend(corollary_annotations(false));
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

    /// Iterated limsup test at level `r`:
    /// `limsup ∫_{t}^{rho(t)} Σ p_i(ζ) b_r(rho(t), sigma_i(ζ)) dζ > 1`.
    pub fn iterated_limsup(&self, r: u32) -> Result<CriterionReport> {
        let samples = self.kernel_window_samples(r, false)?;
        let est = limsup_estimate(&samples, self.config.period_hint)?;
        Ok(self.finish_report(
            CriterionId::IteratedLimsupAdvanced,
            Some(r),
            samples,
            est,
            Some(1.0),
            None,
            true,
        ))
    }

    /// Alpha-refined variant; requires `0 < alpha <= 1/e`.
    pub fn iterated_limsup_alpha(&self, r: u32) -> Result<CriterionReport> {
        let samples = self.kernel_window_samples(r, false)?;
        let est = limsup_estimate(&samples, self.config.period_hint)?;
        let threshold = alpha_threshold(self.alpha);
        Ok(self.finish_report(
            CriterionId::IteratedLimsupAdvancedAlpha,
            Some(r),
            samples,
            est,
            threshold,
            Some(self.alpha),
            threshold.is_some(),
        ))
    }

    /// Iterated liminf test at level `r` with the moving anchor `rho(ζ)`:
    /// `liminf Σ_i ∫_{t}^{rho(t)} p_i(ζ) b_r(rho(ζ), sigma_i(ζ)) dζ > 1/e`.
    pub fn iterated_liminf(&self, r: u32) -> Result<CriterionReport> {
        let samples = self.kernel_window_samples(r, true)?;
        let est = liminf_estimate(&samples, self.config.period_hint)?;
        Ok(self.finish_report(
            CriterionId::IteratedLiminfAdvanced,
            Some(r),
            samples,
            est,
            Some(INV_E),
            None,
            true,
        ))
    }

    /// Classical liminf test over `[t, sigma_min(t)]` against 1/e.
    pub fn classical_liminf(&self) -> Result<CriterionReport> {
        let n = self.grid.len();
        let mut samples = Vec::with_capacity(self.eval_range.1 - self.eval_range.0);
        for j in self.eval_range.0..self.eval_range.1 {
            let t = self.grid.nodes()[j];
            let mut sigma_min = f64::INFINITY;
            let mut bracket = (NO_BRACKET, 0.0);
            for i in 0..self.problem.term_count() {
                let a = self.arg_side[0][i * n + j];
                if a < sigma_min {
                    sigma_min = a;
                    bracket = self.arg_bracket[0][i * n + j];
                }
            }
            let v = interp(&self.sum_p, bracket, "sigma_min mass")? - self.sum_p.value_at_node(j);
            samples.push((t, v));
        }
        let est = liminf_estimate(&samples, self.config.period_hint)?;
        Ok(self.finish_report(
            CriterionId::LadasAdvancedLiminf,
            None,
            samples,
            est,
            Some(INV_E),
            None,
            true,
        ))
    }

    /// Pointwise weighted-advance liminf test `Σ p_i(t)(sigma_i(t) - t) > 1/e`;
    /// requires structurally bounded advances.
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
                v += self.p_side[0][i * n + j] * (self.arg_side[0][i * n + j] - t);
            }
            samples.push((t, v));
        }
        let est = liminf_estimate(&samples, self.config.period_hint)?;
        Ok(self.finish_report(
            CriterionId::Zhou,
            None,
            samples,
            est,
            Some(INV_E),
            None,
            bounded,
        ))
    }

    /// Per-envelope limsup test against 1.
    pub fn per_envelope_limsup(&self) -> Result<CriterionReport> {
        let samples = self.per_envelope_samples()?;
        let est = limsup_estimate(&samples, self.config.period_hint)?;
        Ok(self.finish_report(
            CriterionId::ChatzarakisOcalanLimsup,
            None,
            samples,
            est,
            Some(1.0),
            None,
            true,
        ))
    }

    /// Per-envelope liminf test against 1/e.
    pub fn per_envelope_liminf(&self) -> Result<CriterionReport> {
        let samples = self.per_envelope_samples()?;
        let est = liminf_estimate(&samples, self.config.period_hint)?;
        Ok(self.finish_report(
            CriterionId::ChatzarakisOcalanLiminf,
            None,
            samples,
            est,
            Some(INV_E),
            None,
            true,
        ))
    }

    /// Full advanced suite: classical and per-envelope tests once, iterated
    /// tests for every `r <= r_max`.
    pub fn all_reports(&self) -> Result<Vec<CriterionReport>> {
        let mut out = alloc::vec![
            self.classical_liminf()?,
            self.weighted_pointwise()?,
            self.per_envelope_limsup()?,
            self.per_envelope_liminf()?,
        ];
        for r in 1..=self.effective_r_max() {
            out.push(self.iterated_limsup(r)?);
            out.push(self.iterated_limsup_alpha(r)?);
            out.push(self.iterated_liminf(r)?);
        }
        Ok(out)
    }

    /// Highest kernel level that is both requested and representable.
    pub fn effective_r_max(&self) -> u32 {
        self.config.r_max.min(self.kernels.r_max())
    }
}
