//! CSV emission for plot data and trajectories.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use crate::report::fmt_f64;

/// Writes a two-column CSV of `(t, value)` samples.
pub fn write_samples(path: &Path, header: (&str, &str), samples: &[(f64, f64)]) -> Result<()> {
    let mut out = String::with_capacity(samples.len() * 24 + 32);
    out.push_str(header.0);
    out.push(',');
    out.push_str(header.1);
    out.push('\n');
    for (t, v) in samples {
        out.push_str(&fmt_f64(*t));
        out.push(',');
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Writes paired slices as a two-column CSV.
pub fn write_columns(
    path: &Path,
    header: (&str, &str),
    times: &[f64],
    values: &[f64],
) -> Result<()> {
    let samples: Vec<(f64, f64)> = times.iter().copied().zip(values.iter().copied()).collect();
    write_samples(path, header, &samples)
}
