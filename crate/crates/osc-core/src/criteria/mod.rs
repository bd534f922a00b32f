//! Oscillation criteria and verdict aggregation.
//!
//! Each criterion compares a tail estimate of an integral functional
//! against a threshold (1 or 1/e, optionally lowered by the decay-ratio
//! bound when `0 < alpha <= 1/e`). Estimates are finite-window surrogates
//! for `limsup`/`liminf` at infinity: with a period hint the extreme over
//! the last full period of samples, otherwise over the trailing half of the
//! evaluation window (flagged as window-limited). A criterion only declares
//! `Oscillatory` when its estimate clears the threshold by a strictness
//! margin, so grid noise near a sharp threshold cannot produce a false
//! positive; `Inconclusive` never claims nonoscillation.

mod advanced;
mod delay;

pub use advanced::AdvancedAnalysis;
pub use delay::{single_delay_aliases, DelayAnalysis};

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Euler threshold `1/e`.
pub const INV_E: f64 = 0.36787944117144233;

/// Criterion integrands exponentiate kernel-table differences; exponents
/// are capped here so that near-divergent levels produce huge finite
/// values instead of overflow. Capping only ever underestimates the
/// functional, which is the conservative direction.
pub(crate) const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Oscillatory,
    Inconclusive,
    PreconditionFailed,
}

impl Verdict {
    pub fn code(self) -> &'static str {
        match self {
            Verdict::Oscillatory => "OSCILLATORY",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::PreconditionFailed => "PRECONDITION_FAILED",
        }
    }
}

/// Identifier of an implemented oscillation test. The `code` strings are
/// the stable identifiers used in reports and file output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CriterionId {
    /// Delay liminf test over `[tau_max(t), t]` against 1/e.
    LaddeLiminf,
    /// Advanced liminf test over `[t, sigma_min(t)]` against 1/e.
    LadasAdvancedLiminf,
    /// Pointwise weighted-delay liminf test against 1/e (bounded delays).
    HuntYorke,
    /// Pointwise weighted-advance liminf test against 1/e (bounded advances).
    Zhou,
    /// Single-delay limsup test with one exponential iteration (alias of the
    /// iterated delay limsup test at `m = 1`, `r = 1`).
    BravermanKarpuz,
    /// Single-delay alpha-refined limsup test (alias at `m = 1`, `r = 1`).
    StavroulakisSingleDelay,
    /// Advanced limsup test with per-argument envelopes against 1.
    ChatzarakisOcalanLimsup,
    /// Liminf variant of the same functional against 1/e.
    ChatzarakisOcalanLiminf,
    /// Iterated-kernel delay limsup test against 1.
    IteratedLimsupDelay,
    /// Iterated-kernel delay limsup test against the alpha-lowered threshold.
    IteratedLimsupDelayAlpha,
    /// Iterated-kernel delay liminf test against 1/e.
    IteratedLiminfDelay,
    /// Iterated-kernel advanced limsup test against 1.
    IteratedLimsupAdvanced,
    /// Iterated-kernel advanced limsup test, alpha-lowered threshold.
    IteratedLimsupAdvancedAlpha,
    /// Iterated-kernel advanced liminf test against 1/e.
    IteratedLiminfAdvanced,
}

impl CriterionId {
    pub fn code(self) -> &'static str {
        match self {
            CriterionId::LaddeLiminf => "LADDE_1_8",
            CriterionId::LadasAdvancedLiminf => "LADAS_ADV_1_9",
            CriterionId::HuntYorke => "HUNT_YORKE_1_10",
            CriterionId::Zhou => "ZHOU_1_11",
            CriterionId::BravermanKarpuz => "BK_1_12",
            CriterionId::StavroulakisSingleDelay => "STAVROULAKIS_THM2",
            CriterionId::ChatzarakisOcalanLimsup => "CO_1_13",
            CriterionId::ChatzarakisOcalanLiminf => "CO_1_14",
            CriterionId::IteratedLimsupDelay => "THM_2_4",
            CriterionId::IteratedLimsupDelayAlpha => "THM_2_4_ALPHA",
            CriterionId::IteratedLiminfDelay => "THM_3_3",
            CriterionId::IteratedLimsupAdvanced => "THM_2_4A",
            CriterionId::IteratedLimsupAdvancedAlpha => "THM_2_4AB",
            CriterionId::IteratedLiminfAdvanced => "THM_2_5B",
        }
    }

    pub fn is_delay_side(self) -> bool {
        matches!(
            self,
            CriterionId::LaddeLiminf
                | CriterionId::HuntYorke
                | CriterionId::BravermanKarpuz
                | CriterionId::StavroulakisSingleDelay
                | CriterionId::IteratedLimsupDelay
                | CriterionId::IteratedLimsupDelayAlpha
                | CriterionId::IteratedLiminfDelay
        )
    }
}

/// Result of evaluating one criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: CriterionId,
    /// Kernel iteration the report refers to; `None` for the classical
    /// (iteration-free) tests.
    pub iteration: Option<u32>,
    /// Sampled functional values `(t_j, f(t_j))` over the evaluation window.
    pub samples: Vec<(f64, f64)>,
    /// Tail estimate of the limsup/liminf of the functional.
    pub estimate: f64,
    /// Threshold the estimate is compared against; `None` when a
    /// precondition failed before a threshold was defined.
    pub threshold: Option<f64>,
    /// `estimate - threshold`.
    pub margin: Option<f64>,
    pub verdict: Verdict,
    /// The liminf coefficient-mass `alpha` when the criterion uses it.
    pub alpha: Option<f64>,
    pub annotations: Vec<String>,
    /// Estimate taken over a tail fraction without a period hint.
    pub window_limited: bool,
}

/// Combined verdict over a suite of reports.
#[derive(Debug, Clone)]
pub struct OverallVerdict {
    pub verdict: Verdict,
    pub by: Option<CriterionId>,
    pub iteration: Option<u32>,
    pub annotations: Vec<String>,
}

/// Evaluation parameters shared by all criteria.
#[derive(Debug, Clone, Copy)]
pub struct EvalConfig {
    /// Analysis window `[T0, T1]`.
    pub window: (f64, f64),
    /// Grid step `h`.
    pub step: f64,
    /// Highest kernel iteration to evaluate.
    pub r_max: u32,
    /// Strictness margin added to every threshold.
    pub margin: f64,
    /// Known asymptotic period of the problem data, if any.
    pub period_hint: Option<f64>,
}

impl EvalConfig {
    pub fn new(window: (f64, f64)) -> Self {
        EvalConfig {
            window,
            step: 1e-3,
            r_max: 5,
            margin: 1e-6,
            period_hint: None,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.window.1 > self.window.0) {
            return Err(Error::BadParameter("analysis window is empty".into()));
        }
        if !(self.step > 0.0) {
            return Err(Error::BadParameter("step must be positive".into()));
        }
        if self.r_max < 1 {
            return Err(Error::BadParameter("r_max must be at least 1".into()));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::BadParameter("margin must be nonnegative".into()));
        }
        if let Some(p) = self.period_hint {
            if !(p > 0.0) {
                return Err(Error::BadParameter("period hint must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Tail estimate of a sampled functional.
#[derive(Debug, Clone, Copy)]
pub struct TailEstimate {
    pub value: f64,
    /// Sample point where the extreme was attained.
    pub at: f64,
    pub window_limited: bool,
}

fn tail_extreme(
    samples: &[(f64, f64)],
    period_hint: Option<f64>,
    better: impl Fn(f64, f64) -> bool,
) -> Result<TailEstimate> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            have: samples.len(),
            need: 2,
        });
    }
    let t_first = samples[0].0;
    let t_last = samples[samples.len() - 1].0;
    let (cut, window_limited) = match period_hint {
        Some(p) => {
            if t_last - t_first < 2.0 * p - 1e-9 {
                return Err(Error::TooFewSamples {
                    have: samples.len(),
                    need: samples.len() + 1,
                });
            }
            (t_last - p, false)
        }
        None => (0.5 * (t_first + t_last), true),
    };
    let tol = 1e-9 * math::abs(cut).max(1.0);
    let mut best: Option<(f64, f64)> = None;
    for &(t, v) in samples.iter().rev() {
        if t < cut - tol {
            break;
        }
        match best {
            Some((_, bv)) if !better(v, bv) => {}
            _ => best = Some((t, v)),
        }
    }
    let (at, value) = best.ok_or(Error::TooFewSamples { have: 0, need: 2 })?;
    Ok(TailEstimate {
        value,
        at,
        window_limited,
    })
}

/// Numerical surrogate for `limsup_{t -> inf} f(t)`: the maximum of the
/// samples over the last full period (with a hint) or over the trailing
/// half of the evaluation window.
pub fn limsup_estimate(samples: &[(f64, f64)], period_hint: Option<f64>) -> Result<TailEstimate> {
    tail_extreme(samples, period_hint, |a, b| a > b)
}

/// Dual surrogate for `liminf_{t -> inf} f(t)`.
pub fn liminf_estimate(samples: &[(f64, f64)], period_hint: Option<f64>) -> Result<TailEstimate> {
    tail_extreme(samples, period_hint, |a, b| a < b)
}

/// Threshold `1 - (1 - a - sqrt(1 - 2a - a^2)) / 2` of the alpha-refined
/// limsup tests, defined for `0 < a <= 1/e` (where the radicand is at least
/// `1 - 2/e - 1/e^2 > 0`). Returns `None` outside that range.
pub fn alpha_threshold(alpha: f64) -> Option<f64> {
    if !(alpha > 0.0) || alpha > INV_E * (1.0 + 1e-12) {
        return None;
    }
    let radicand = (1.0 - 2.0 * alpha - alpha * alpha).max(0.0);
    Some(1.0 - (1.0 - alpha - math::sqrt(radicand)) / 2.0)
}

pub(crate) fn compare_to_threshold(estimate: f64, threshold: f64, margin: f64) -> Verdict {
    if estimate > threshold + margin {
        Verdict::Oscillatory
    } else {
        Verdict::Inconclusive
    }
}

/// Differential-inequality corollaries attached to a positive verdict.
pub(crate) fn corollary_annotations(delay_side: bool) -> Vec<String> {
    if delay_side {
        alloc::vec![
            "corollary: x'(t) + sum_i p_i(t) x(tau_i(t)) <= 0 has no eventually positive solutions"
                .into(),
            "corollary: x'(t) + sum_i p_i(t) x(tau_i(t)) >= 0 has no eventually negative solutions"
                .into(),
        ]
    } else {
        alloc::vec![
            "corollary: x'(t) - sum_i p_i(t) x(sigma_i(t)) >= 0 has no eventually positive solutions"
                .into(),
            "corollary: x'(t) - sum_i p_i(t) x(sigma_i(t)) <= 0 has no eventually negative solutions"
                .into(),
        ]
    }
}

/// Combines criterion reports: `Oscillatory` as soon as any report fired,
/// citing the firing criterion with the smallest iteration (ties broken by
/// the canonical criterion order) and attaching its differential-inequality
/// corollaries.
pub fn aggregate(reports: &[CriterionReport]) -> OverallVerdict {
    let mut winner: Option<&CriterionReport> = None;
    for report in reports {
        if report.verdict != Verdict::Oscillatory {
            continue;
        }
        let better = match winner {
            None => true,
            Some(w) => {
                let key = (report.iteration.unwrap_or(0), report.id);
                let wkey = (w.iteration.unwrap_or(0), w.id);
                key < wkey
            }
        };
        if better {
            winner = Some(report);
        }
    }
    match winner {
        Some(w) => OverallVerdict {
            verdict: Verdict::Oscillatory,
            by: Some(w.id),
            iteration: w.iteration,
            annotations: corollary_annotations(w.id.is_delay_side()),
        },
        None => OverallVerdict {
            verdict: Verdict::Inconclusive,
            by: None,
            iteration: None,
            annotations: Vec::new(),
        },
    }
}
