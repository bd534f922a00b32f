//! Cumulative-integral tables and breakpoint-aware trapezoid quadrature.
//!
//! Every `∫ ... dζ` in the criteria pipeline is realized either as a
//! difference of a prefix table (`CumulativeTable`) or as a direct panelwise
//! trapezoid sweep ([`integrate_panelwise`]). Integrand samples are taken
//! one-sided so that jump discontinuities sitting exactly on grid nodes do
//! not leak across panels; with all breakpoints on nodes the rule is exact
//! for piecewise-affine integrands.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::piecewise::Side;

/// Prefix integrals `F_j = ∫_{t_0}^{t_j} f` over a shared grid, with linear
/// interpolation between nodes.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

/// Builds the prefix table of `f` by the composite trapezoid rule.
///
/// `f` is sampled one-sided at panel ends; a non-finite sample aborts with
/// the offending node.
pub fn cumulative(
    grid: &Arc<Grid>,
    mut f: impl FnMut(f64, Side) -> Result<f64>,
) -> Result<CumulativeTable> {
    let nodes = grid.nodes();
    let mut values = Vec::with_capacity(nodes.len());
    values.push(0.0);
    let mut acc = 0.0;
    for j in 0..nodes.len() - 1 {
        let a = nodes[j];
        let b = nodes[j + 1];
        let fa = f(a, Side::Right)?;
        let fb = f(b, Side::Left)?;
        if !fa.is_finite() {
            return Err(Error::NonFinite {
                what: "integrand".into(),
                t: a,
            });
        }
        if !fb.is_finite() {
            return Err(Error::NonFinite {
                what: "integrand".into(),
                t: b,
            });
        }
        acc += 0.5 * (fa + fb) * (b - a);
        values.push(acc);
    }
    Ok(CumulativeTable {
        grid: Arc::clone(grid),
        values,
    })
}

/// Prefix table from precomputed one-sided node samples: panel `j` uses
/// `right[j]` at its left end and `left[j+1]` at its right end.
pub fn cumulative_sampled(
    grid: &Arc<Grid>,
    right: &[f64],
    left: &[f64],
) -> Result<CumulativeTable> {
    let nodes = grid.nodes();
    if right.len() != nodes.len() || left.len() != nodes.len() {
        return Err(Error::GridMismatch);
    }
    let mut values = Vec::with_capacity(nodes.len());
    values.push(0.0);
    let mut acc = 0.0;
    for j in 0..nodes.len() - 1 {
        let fa = right[j];
        let fb = left[j + 1];
        if !fa.is_finite() || !fb.is_finite() {
            return Err(Error::NonFinite {
                what: "sampled integrand".into(),
                t: nodes[j],
            });
        }
        acc += 0.5 * (fa + fb) * (nodes[j + 1] - nodes[j]);
        values.push(acc);
    }
    Ok(CumulativeTable {
        grid: Arc::clone(grid),
        values,
    })
}

impl CumulativeTable {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Exact prefix value at node `j` (no interpolation).
    pub fn value_at_node(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `F(t)` with linear interpolation between nodes.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let (j, frac) = self.grid.bracket(t)?;
        Ok(self.values[j] + frac * (self.values[j + 1] - self.values[j]))
    }

    /// `∫_a^b f = F(b) - F(a)`; antisymmetric in `(a, b)`.
    pub fn integral_between(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.value_at(b)? - self.value_at(a)?)
    }
}

/// Direct trapezoid integral of `f` over `[a, b]`, split along the grid
/// nodes inside the interval. Endpoints off the mesh are handled as partial
/// panels with `f` evaluated exactly there.
pub fn integrate_panelwise(
    grid: &Grid,
    a: f64,
    b: f64,
    mut f: impl FnMut(f64, Side) -> Result<f64>,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return Ok(-integrate_panelwise(grid, b, a, f)?);
    }
    if !grid.contains(a) {
        return Err(Error::Domain {
            what: "integration bound".into(),
            t: a,
        });
    }
    if !grid.contains(b) {
        return Err(Error::Domain {
            what: "integration bound".into(),
            t: b,
        });
    }
    let nodes = grid.nodes();
    let (lo, hi) = grid.node_range(a, b);
    let mut acc = 0.0;
    let mut left_t = a;
    let mut left_v = f(a, Side::Right)?;
    for &t in &nodes[lo..hi] {
        if t <= left_t {
            continue;
        }
        let right_v = f(t, Side::Left)?;
        if !right_v.is_finite() {
            return Err(Error::NonFinite {
                what: "integrand".into(),
                t,
            });
        }
        acc += 0.5 * (left_v + right_v) * (t - left_t);
        left_t = t;
        left_v = f(t, Side::Right)?;
    }
    if left_t < b {
        let right_v = f(b, Side::Left)?;
        if !right_v.is_finite() {
            return Err(Error::NonFinite {
                what: "integrand".into(),
                t: b,
            });
        }
        acc += 0.5 * (left_v + right_v) * (b - left_t);
    }
    Ok(acc)
}

/// Trapezoid sweep over `[lo, hi]` with fast node-indexed integrand
/// samples; either bound may fall between nodes, in which case the
/// `point_val` fallback evaluates the integrand exactly there.
#[allow(clippy::needless_range_loop)] // the index feeds the closures
pub(crate) fn integrate_indexed(
    grid: &Grid,
    lo: f64,
    hi: f64,
    node_val: &mut dyn FnMut(usize, Side) -> Result<f64>,
    point_val: &mut dyn FnMut(f64, Side) -> Result<f64>,
) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let nodes = grid.nodes();
    let (jlo, jhi) = grid.node_range(lo, hi);
    let tol = 1e-12 * crate::math::abs(hi).max(1.0);
    if jlo >= jhi {
        let a = point_val(lo, Side::Right)?;
        let b = point_val(hi, Side::Left)?;
        return Ok(0.5 * (a + b) * (hi - lo));
    }
    let mut acc = 0.0;
    let (mut prev_t, mut prev_v, start) = if nodes[jlo] - lo > tol {
        (lo, point_val(lo, Side::Right)?, jlo)
    } else {
        (nodes[jlo], node_val(jlo, Side::Right)?, jlo + 1)
    };
    for j in start..jhi {
        let right = node_val(j, Side::Left)?;
        if !right.is_finite() {
            return Err(Error::NonFinite {
                what: "integrand".into(),
                t: nodes[j],
            });
        }
        acc += 0.5 * (prev_v + right) * (nodes[j] - prev_t);
        prev_t = nodes[j];
        prev_v = node_val(j, Side::Right)?;
    }
    if hi - prev_t > tol {
        let right = point_val(hi, Side::Left)?;
        acc += 0.5 * (prev_v + right) * (hi - prev_t);
    }
    Ok(acc)
}
