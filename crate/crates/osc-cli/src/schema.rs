//! JSON problem-file schema.
//!
//! ```json
//! {
//!   "type": "delay",
//!   "terms": [ { "p": <piecewise>, "arg": <piecewise> } ],
//!   "history": <piecewise, optional>,
//!   "window": [T0, T1],
//!   "period_hint": 2.0
//! }
//! ```
//!
//! with piecewise objects
//!
//! ```json
//! { "t0": 1.0, "period": 2.0,
//!   "cells": [ { "l": 0.0, "u": 1.0, "c0": 1.0, "c1": -1.0, "c2": 4.0 } ] }
//! ```
//!
//! A cell's value is `(c0 + c1*t + c2*k) * exp(d0 + d1*t + d2*k)` with `k`
//! the period index; the exponential coefficients `d0`, `d1`, `d2` default
//! to zero. `"period": null` means an aperiodic cell list, in which case
//! `"u": null` marks a final unbounded cell.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use osc_core::piecewise::{Cell, PiecewiseCellFunction};
use osc_core::problem::{AdvancedProblem, DelayProblem, HistoryFunction, Term};

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Delay,
    Advanced,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub l: f64,
    /// `null` marks a final unbounded cell of an aperiodic list.
    pub u: Option<f64>,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(default)]
    pub d0: f64,
    #[serde(default)]
    pub d1: f64,
    #[serde(default)]
    pub d2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseSpec {
    pub t0: f64,
    pub period: Option<f64>,
    pub cells: Vec<CellSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub p: PiecewiseSpec,
    pub arg: PiecewiseSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "type")]
    pub kind: ProblemKind,
    pub terms: Vec<TermSpec>,
    #[serde(default)]
    pub history: Option<PiecewiseSpec>,
    pub window: [f64; 2],
    #[serde(default)]
    pub period_hint: Option<f64>,
}

impl PiecewiseSpec {
    pub fn build(&self) -> Result<PiecewiseCellFunction> {
        let cells: Vec<Cell> = self
            .cells
            .iter()
            .map(|c| Cell {
                lower: c.l,
                upper: c.u.unwrap_or(f64::INFINITY),
                c0: c.c0,
                c1: c.c1,
                c2: c.c2,
                d0: c.d0,
                d1: c.d1,
                d2: c.d2,
            })
            .collect();
        PiecewiseCellFunction::new(self.t0, self.period, cells)
            .map_err(|e| anyhow::anyhow!("invalid piecewise function: {e}"))
    }
}

/// A parsed problem file with its analysis defaults.
pub struct LoadedFile {
    pub problem: LoadedProblem,
    pub history: Option<HistoryFunction>,
    pub window: (f64, f64),
    pub period_hint: Option<f64>,
}

pub enum LoadedProblem {
    Delay(DelayProblem),
    Advanced(AdvancedProblem),
}

impl LoadedProblem {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LoadedProblem::Delay(_) => "delay",
            LoadedProblem::Advanced(_) => "advanced",
        }
    }

    pub fn term_count(&self) -> usize {
        match self {
            LoadedProblem::Delay(p) => p.term_count(),
            LoadedProblem::Advanced(p) => p.term_count(),
        }
    }
}

/// Parses and converts a problem file, with line/field diagnostics on
/// malformed input.
pub fn parse_problem(text: &str) -> Result<LoadedFile> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| {
        anyhow::anyhow!(
            "parse error at line {}, column {}: {}",
            e.line(),
            e.column(),
            e
        )
    })?;
    if file.terms.is_empty() {
        bail!("problem file declares no terms");
    }
    if !(file.window[1] > file.window[0]) {
        bail!(
            "problem window [{}, {}] is empty",
            file.window[0],
            file.window[1]
        );
    }
    let mut terms = Vec::with_capacity(file.terms.len());
    for (i, t) in file.terms.iter().enumerate() {
        let coefficient =
            t.p.build()
                .with_context(|| format!("term {i}: coefficient"))?;
        let argument = t
            .arg
            .build()
            .with_context(|| format!("term {i}: argument"))?;
        terms.push(Term {
            coefficient,
            argument,
        });
    }
    let problem = match file.kind {
        ProblemKind::Delay => LoadedProblem::Delay(
            DelayProblem::new(terms).map_err(|e| anyhow::anyhow!("invalid problem: {e}"))?,
        ),
        ProblemKind::Advanced => LoadedProblem::Advanced(
            AdvancedProblem::new(terms).map_err(|e| anyhow::anyhow!("invalid problem: {e}"))?,
        ),
    };
    let history = match &file.history {
        Some(spec) => Some(HistoryFunction::new(spec.build().context("history")?)),
        None => None,
    };
    Ok(LoadedFile {
        problem,
        history,
        window: (file.window[0], file.window[1]),
        period_hint: file.period_hint,
    })
}

/// Parses a standalone piecewise JSON file (used for `--history` and
/// candidate solutions).
pub fn parse_piecewise(text: &str) -> Result<PiecewiseCellFunction> {
    let spec: PiecewiseSpec = serde_json::from_str(text).map_err(|e| {
        anyhow::anyhow!(
            "parse error at line {}, column {}: {}",
            e.line(),
            e.column(),
            e
        )
    })?;
    spec.build()
}
