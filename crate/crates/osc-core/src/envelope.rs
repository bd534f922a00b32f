//! Monotone envelopes of deviating arguments.
//!
//! Non-monotone arguments enter every criterion only through their monotone
//! surrogates: the running supremum `g_i(t) = sup_{s<=t} tau_i(s)` of a
//! delay and the running infimum `rho_i(t) = inf_{s>=t} sigma_i(s)` of an
//! advance. On a grid containing all cell endpoints both are computed by a
//! single prefix/suffix sweep over one-sided node samples, which is exact
//! for affine cells (their extrema sit on endpoints); non-affine cells fall
//! back to plain node sampling and the envelope is flagged inexact.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::piecewise::{PiecewiseCellFunction, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotoneKind {
    /// Running supremum of a delay; non-decreasing, `g(t) <= t`.
    RunningSup,
    /// Running infimum of an advance; non-decreasing, `rho(t) >= t`.
    RunningInf,
}

/// Grid-sampled monotone envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
    kind: MonotoneKind,
    exact: bool,
}

impl EnvelopeFunction {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> MonotoneKind {
        self.kind
    }

    /// Whether node values are exact (all source cells affine) rather than
    /// grid-sampled approximations.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn value_at_node(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Envelope value at `t`, linearly interpolated between nodes.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let (j, frac) = self.grid.bracket(t)?;
        Ok(self.values[j] + frac * (self.values[j + 1] - self.values[j]))
    }
}

/// `g(t) = sup_{base <= s <= t} tau(s)` sampled on the grid.
pub fn running_sup(tau: &PiecewiseCellFunction, grid: &Arc<Grid>) -> Result<EnvelopeFunction> {
    let nodes = grid.nodes();
    let mut values = Vec::with_capacity(nodes.len());
    let mut acc = f64::NEG_INFINITY;
    for &t in nodes {
        let r = tau.eval_side(t, Side::Right)?;
        let l = tau.eval_side(t, Side::Left)?;
        acc = acc.max(l).max(r);
        values.push(acc);
    }
    Ok(EnvelopeFunction {
        grid: Arc::clone(grid),
        values,
        kind: MonotoneKind::RunningSup,
        exact: tau.all_affine(),
    })
}

/// `rho(t) = inf_{s >= t} sigma(s)` by a backward sweep over the (extended)
/// grid. The caller must extend the grid far enough past the analysis
/// window that no later dip of `sigma` is missed; extending by the advance
/// bound suffices because `sigma(s) >= s` past the extension.
pub fn running_inf(sigma: &PiecewiseCellFunction, grid: &Arc<Grid>) -> Result<EnvelopeFunction> {
    let nodes = grid.nodes();
    let mut values = alloc::vec![0.0; nodes.len()];
    let mut acc = f64::INFINITY;
    for (j, &t) in nodes.iter().enumerate().rev() {
        let r = sigma.eval_side(t, Side::Right)?;
        let l = sigma.eval_side(t, Side::Left)?;
        acc = acc.min(l).min(r);
        values[j] = acc;
    }
    Ok(EnvelopeFunction {
        grid: Arc::clone(grid),
        values,
        kind: MonotoneKind::RunningInf,
        exact: sigma.all_affine(),
    })
}

fn combine(
    envelopes: &[EnvelopeFunction],
    pick: impl Fn(f64, f64) -> f64,
) -> Result<EnvelopeFunction> {
    let first = envelopes
        .first()
        .ok_or(Error::BadParameter("no envelopes to combine".into()))?;
    let mut values = first.values.clone();
    for e in &envelopes[1..] {
        if e.kind != first.kind
            || !Arc::ptr_eq(&e.grid, &first.grid) && e.grid.nodes() != first.grid.nodes()
        {
            return Err(Error::GridMismatch);
        }
        for (v, &w) in values.iter_mut().zip(&e.values) {
            *v = pick(*v, w);
        }
    }
    Ok(EnvelopeFunction {
        grid: Arc::clone(&first.grid),
        values,
        kind: first.kind,
        exact: envelopes.iter().all(|e| e.exact),
    })
}

/// Pointwise maximum `g = max_i g_i`.
pub fn combine_max(envelopes: &[EnvelopeFunction]) -> Result<EnvelopeFunction> {
    combine(envelopes, f64::max)
}

/// Pointwise minimum `rho = min_i rho_i`.
pub fn combine_min(envelopes: &[EnvelopeFunction]) -> Result<EnvelopeFunction> {
    combine(envelopes, f64::min)
}
