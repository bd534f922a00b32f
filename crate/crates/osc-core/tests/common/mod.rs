//! Shared builders and independent oracles for the integration tests.
//!
//! The oracles here deliberately avoid the cumulative-weight-table
//! representation used by the library: kernels are evaluated by literal
//! nested quadrature of their defining integrals, and envelopes by a dense
//! prefix/suffix sweep. They exist to cross-check the separable fast path.

// each test binary uses its own subset of these helpers
#![allow(dead_code)]

use osc_core::piecewise::{Cell, PiecewiseCellFunction, Side};
use osc_core::problem::{AdvancedProblem, DelayProblem, Term};

/// Parameters of one continuous zigzag deviation: the deviation magnitude
/// moves `d0 -> d1 -> d0` over each period, with the knot at `s`.
#[derive(Debug, Clone, Copy)]
pub struct Zigzag {
    pub period: f64,
    pub knot: f64,
    pub d0: f64,
    pub d1: f64,
}

/// `tau(t) = t - d(t)` (or `sigma(t) = t + d(t)`) with `d` the continuous
/// periodic zigzag. Cell algebra: on `[0, knot)` the deviation is affine
/// from `d0` to `d1`, then back.
pub fn zigzag_argument(z: Zigzag, advanced: bool) -> PiecewiseCellFunction {
    let sgn = if advanced { 1.0 } else { -1.0 };
    let s1 = (z.d1 - z.d0) / z.knot;
    let s2 = (z.d0 - z.d1) / (z.period - z.knot);
    // tau = t + sgn*d(t); d(t) = d0 + s1*(t - kP) on [0, knot)
    let c1_a = 1.0 + sgn * s1;
    let c2_a = -sgn * s1 * z.period;
    let c0_a = sgn * z.d0;
    // d(t) = d1 + s2*(t - kP - knot) on [knot, P)
    let c1_b = 1.0 + sgn * s2;
    let c2_b = -sgn * s2 * z.period;
    let c0_b = sgn * (z.d1 - s2 * z.knot);
    PiecewiseCellFunction::new(
        0.0,
        Some(z.period),
        vec![
            Cell::affine(0.0, z.knot, c0_a, c1_a, c2_a),
            Cell::affine(z.knot, z.period, c0_b, c1_b, c2_b),
        ],
    )
    .expect("valid zigzag cells")
}

/// Two-term problem with constant coefficients and zigzag delays.
pub fn random_delay_problem(p: [f64; 2], z: [Zigzag; 2]) -> DelayProblem {
    DelayProblem::new(vec![
        Term {
            coefficient: PiecewiseCellFunction::constant(0.0, p[0]),
            argument: zigzag_argument(z[0], false),
        },
        Term {
            coefficient: PiecewiseCellFunction::constant(0.0, p[1]),
            argument: zigzag_argument(z[1], false),
        },
    ])
    .expect("valid problem")
}

pub fn random_advanced_problem(p: [f64; 2], z: [Zigzag; 2]) -> AdvancedProblem {
    AdvancedProblem::new(vec![
        Term {
            coefficient: PiecewiseCellFunction::constant(0.0, p[0]),
            argument: zigzag_argument(z[0], true),
        },
        Term {
            coefficient: PiecewiseCellFunction::constant(0.0, p[1]),
            argument: zigzag_argument(z[1], true),
        },
    ])
    .expect("valid problem")
}

/// Kernel oracle by literal nested quadrature of the defining integrals.
/// Requires the total coefficient to be constant (all generators here
/// satisfy that), which gives the first level in closed form.
pub struct NestedKernelOracle<'a> {
    terms: Vec<(&'a PiecewiseCellFunction, &'a PiecewiseCellFunction)>,
    coefficient_sum: f64,
    pub step: f64,
    advanced: bool,
}

impl<'a> NestedKernelOracle<'a> {
    pub fn delay(problem: &'a DelayProblem, step: f64) -> Self {
        let terms: Vec<_> = problem
            .terms()
            .iter()
            .map(|t| (&t.coefficient, &t.argument))
            .collect();
        let coefficient_sum = terms.iter().map(|(c, _)| c.eval(1.0).unwrap()).sum();
        NestedKernelOracle {
            terms,
            coefficient_sum,
            step,
            advanced: false,
        }
    }

    pub fn advanced(problem: &'a AdvancedProblem, step: f64) -> Self {
        let terms: Vec<_> = problem
            .terms()
            .iter()
            .map(|t| (&t.coefficient, &t.argument))
            .collect();
        let coefficient_sum = terms.iter().map(|(c, _)| c.eval(1.0).unwrap()).sum();
        NestedKernelOracle {
            terms,
            coefficient_sum,
            step,
            advanced: true,
        }
    }

    fn weight(&self, r: u32, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, arg)| {
                let p = c.eval(z).unwrap();
                let dev = arg.eval(z).unwrap();
                p * self.kernel(r, z, dev)
            })
            .sum()
    }

    /// `a_r(t, s)` (delay) or `b_r(t, s)` (advanced) by recursive trapezoid
    /// quadrature; the level-1 kernel uses the constant-mass closed form.
    pub fn kernel(&self, r: u32, t: f64, s: f64) -> f64 {
        let (lo, hi) = if self.advanced { (t, s) } else { (s, t) };
        if r == 1 {
            return (self.coefficient_sum * (hi - lo)).exp();
        }
        if hi <= lo {
            return 1.0;
        }
        let n = ((hi - lo) / self.step).ceil().max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        let mut prev = self.weight(r - 1, lo);
        for i in 1..=n {
            let z = lo + i as f64 * h;
            let cur = self.weight(r - 1, z);
            acc += 0.5 * (prev + cur) * h;
            prev = cur;
        }
        acc.exp()
    }
}

/// Literal quadratic-scan envelopes over a given node set: same sampling
/// as the library sweep, O(N^2) by construction.
pub struct BruteEnvelope {
    pub values: Vec<f64>,
}

impl BruteEnvelope {
    fn one_sided_samples(arg: &PiecewiseCellFunction, nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let right: Vec<f64> = nodes
            .iter()
            .map(|&t| arg.eval_side(t, Side::Right).unwrap())
            .collect();
        let left: Vec<f64> = nodes
            .iter()
            .map(|&t| arg.eval_side(t, Side::Left).unwrap())
            .collect();
        (right, left)
    }

    pub fn running_sup(arg: &PiecewiseCellFunction, nodes: &[f64]) -> Self {
        let (right, left) = Self::one_sided_samples(arg, nodes);
        let mut values = Vec::with_capacity(nodes.len());
        for j in 0..nodes.len() {
            let mut best = f64::NEG_INFINITY;
            for i in 0..=j {
                best = best.max(right[i]).max(left[i]);
            }
            values.push(best);
        }
        BruteEnvelope { values }
    }

    pub fn running_inf(arg: &PiecewiseCellFunction, nodes: &[f64]) -> Self {
        let (right, left) = Self::one_sided_samples(arg, nodes);
        let mut values = Vec::with_capacity(nodes.len());
        for j in 0..nodes.len() {
            let mut best = f64::INFINITY;
            for i in j..nodes.len() {
                best = best.min(right[i]).min(left[i]);
            }
            values.push(best);
        }
        BruteEnvelope { values }
    }
}
