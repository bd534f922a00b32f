//! Breakpoint-aware quadrature grids.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::piecewise::PiecewiseCellFunction;

/// Sorted node set: a uniform step-`h` mesh over `[a, b]` merged with every
/// cell endpoint of the supplied functions. All quadrature, envelopes and
/// kernel tables share one grid so that piecewise-affine integrands stay
/// exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
}

impl Grid {
    /// Uniform mesh over `[a, b]` with every breakpoint of `functions`
    /// inside the interval inserted as an extra node.
    pub fn build(a: f64, b: f64, h: f64, functions: &[&PiecewiseCellFunction]) -> Result<Grid> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::BadParameter("grid step must be positive".into()));
        }
        if !(b > a) {
            return Err(Error::BadParameter("empty grid window".into()));
        }
        let n = ((b - a) / h) as usize;
        let mut nodes = Vec::with_capacity(n + 2 + functions.len() * 8);
        for i in 0..=n {
            nodes.push(a + i as f64 * h);
        }
        nodes.push(b);
        for f in functions {
            nodes.extend(f.breakpoints_in(a, b));
        }
        nodes.sort_by(|x, y| x.partial_cmp(y).expect("non-finite grid node"));
        let mut merged: Vec<f64> = Vec::with_capacity(nodes.len());
        for t in nodes {
            match merged.last() {
                Some(&prev) if t - prev <= 1e-12 * math::abs(t).max(1.0) => {}
                _ => merged.push(t),
            }
        }
        // Clamp the final node to b exactly.
        if let Some(last) = merged.last_mut() {
            if math::abs(*last - b) <= 1e-12 * math::abs(b).max(1.0) {
                *last = b;
            }
        }
        if merged.len() < 2 {
            return Err(Error::BadParameter("grid needs at least two nodes".into()));
        }
        Ok(Grid { nodes: merged })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn contains(&self, t: f64) -> bool {
        let tol = 1e-12 * math::abs(t).max(1.0);
        t >= self.start() - tol && t <= self.end() + tol
    }

    /// Index `j` and fraction `frac` with `t = (1-frac)*nodes[j] + frac*nodes[j+1]`.
    pub fn bracket(&self, t: f64) -> Result<(usize, f64)> {
        if !self.contains(t) {
            return Err(Error::Domain {
                what: "grid lookup".into(),
                t,
            });
        }
        let j = self.nodes.partition_point(|&x| x <= t);
        let j = if j == 0 {
            0
        } else {
            (j - 1).min(self.nodes.len() - 2)
        };
        let width = self.nodes[j + 1] - self.nodes[j];
        let frac = ((t - self.nodes[j]) / width).clamp(0.0, 1.0);
        Ok((j, frac))
    }

    /// Indices of nodes lying in `[a, b]` (inclusive, with rounding slack).
    pub fn node_range(&self, a: f64, b: f64) -> (usize, usize) {
        let tol_a = 1e-12 * math::abs(a).max(1.0);
        let tol_b = 1e-12 * math::abs(b).max(1.0);
        let lo = self.nodes.partition_point(|&x| x < a - tol_a);
        let hi = self.nodes.partition_point(|&x| x <= b + tol_b);
        (lo, hi)
    }
}

/// Analysis grid for a set of problem functions over `[window.0, window.1]`,
/// extended upward by `upper_margin` (advanced problems need room for the
/// deviated arguments; delay problems pass 0).
pub fn build_grid(
    functions: &[&PiecewiseCellFunction],
    window: (f64, f64),
    h: f64,
    upper_margin: f64,
) -> Result<Arc<Grid>> {
    if upper_margin < 0.0 || !upper_margin.is_finite() {
        return Err(Error::BadParameter(
            "grid margin must be finite and nonnegative".into(),
        ));
    }
    Ok(Arc::new(Grid::build(
        window.0,
        window.1 + upper_margin,
        h,
        functions,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::Cell;
    use alloc::vec;

    #[test]
    fn uniform_plus_endpoints() {
        let f = PiecewiseCellFunction::new(
            0.0,
            Some(4.0),
            vec![
                Cell::affine(0.0, 2.0, 0.0, 0.0, 0.0),
                Cell::affine(2.0, 3.0, 1.0, 0.0, 0.0),
                Cell::affine(3.0, 4.0, 0.0, 0.0, 0.0),
            ],
        )
        .unwrap();
        let g = Grid::build(1.0, 5.0, 0.5, &[&f]).unwrap();
        for want in [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0] {
            assert!(
                g.nodes().iter().any(|&t| (t - want).abs() < 1e-12),
                "missing {want}"
            );
        }
        // max spacing bounded by h
        for w in g.nodes().windows(2) {
            assert!(w[1] - w[0] <= 0.5 + 1e-12);
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn node_count_scale() {
        let f = PiecewiseCellFunction::constant(1.0, 0.3);
        let g = Grid::build(1.0, 21.0, 1e-3, &[&f]).unwrap();
        assert!(g.len() >= 20_000 && g.len() < 20_100, "len = {}", g.len());
    }

    #[test]
    fn bracket_interpolation_points() {
        let f = PiecewiseCellFunction::constant(0.0, 1.0);
        let g = Grid::build(0.0, 1.0, 0.25, &[&f]).unwrap();
        let (j, frac) = g.bracket(0.625).unwrap();
        assert_eq!(j, 2);
        assert!((frac - 0.5).abs() < 1e-12);
        let (j, frac) = g.bracket(1.0).unwrap();
        assert_eq!(j, g.len() - 2);
        assert!((frac - 1.0).abs() < 1e-12);
        assert!(g.bracket(1.5).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        let f = PiecewiseCellFunction::constant(0.0, 1.0);
        assert!(Grid::build(0.0, 1.0, 0.0, &[&f]).is_err());
        assert!(Grid::build(1.0, 1.0, 0.1, &[&f]).is_err());
    }
}
