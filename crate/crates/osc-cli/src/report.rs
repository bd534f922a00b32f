//! Deterministic JSON report writer.
//!
//! Reports must be byte-identical across runs and platforms for the same
//! input, so floats are rendered through one fixed 12-significant-digit
//! formatter and object fields are emitted in a fixed order by hand.

use std::fmt::Write as _;

use osc_core::criteria::{CriterionReport, OverallVerdict};

/// Formats with 12 significant digits, trimming trailing zeros; positional
/// notation for moderate exponents, scientific otherwise. The output is a
/// valid JSON number.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        // never expected in reports; keep the document valid JSON
        return "null".into();
    }
    let sci = format!("{:.11e}", x); // 12 significant digits
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if neg { "-" } else { "" };

    let mut out = String::new();
    if (-4..12).contains(&exp) {
        if exp >= 0 {
            let point = (exp + 1) as usize;
            if digits.len() <= point {
                let _ = write!(out, "{sign}{digits}{}", "0".repeat(point - digits.len()));
            } else {
                let _ = write!(out, "{sign}{}.{}", &digits[..point], &digits[point..]);
            }
        } else {
            let _ = write!(out, "{sign}0.{}{}", "0".repeat((-exp - 1) as usize), digits);
        }
    } else if digits.len() == 1 {
        let _ = write!(out, "{sign}{digits}e{exp}");
    } else {
        let _ = write!(out, "{sign}{}.{}e{exp}", &digits[..1], &digits[1..]);
    }
    out
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn opt_f64(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => "null".into(),
    }
}

fn opt_u32(x: Option<u32>) -> String {
    match x {
        Some(v) => v.to_string(),
        None => "null".into(),
    }
}

/// Header block describing the run configuration.
pub struct ProblemMeta<'a> {
    pub path: &'a str,
    pub kind: &'a str,
    pub terms: usize,
    pub window: (f64, f64),
    pub step: f64,
    pub r_max: u32,
    pub margin: f64,
    pub period_hint: Option<f64>,
}

/// Renders the full check report.
pub fn render_report(
    meta: &ProblemMeta,
    criteria: &[CriterionReport],
    overall: &OverallVerdict,
) -> String {
    let mut out = String::new();
    out.push_str("{\n  \"problem\": {");
    let _ = write!(
        out,
        "\"path\": {}, \"type\": {}, \"terms\": {}, \"window\": [{}, {}], \
         \"step\": {}, \"r_max\": {}, \"margin\": {}, \"period_hint\": {}",
        json_string(meta.path),
        json_string(meta.kind),
        meta.terms,
        fmt_f64(meta.window.0),
        fmt_f64(meta.window.1),
        fmt_f64(meta.step),
        meta.r_max,
        fmt_f64(meta.margin),
        opt_f64(meta.period_hint),
    );
    out.push_str("},\n  \"criteria\": [\n");
    for (i, c) in criteria.iter().enumerate() {
        let _ = write!(
            out,
            "    {{\"id\": {}, \"r\": {}, \"estimate\": {}, \"threshold\": {}, \
             \"margin\": {}, \"verdict\": {}",
            json_string(c.id.code()),
            opt_u32(c.iteration),
            fmt_f64(c.estimate),
            opt_f64(c.threshold),
            opt_f64(c.margin),
            json_string(c.verdict.code()),
        );
        if let Some(alpha) = c.alpha {
            let _ = write!(out, ", \"alpha\": {}", fmt_f64(alpha));
        }
        out.push('}');
        out.push_str(if i + 1 < criteria.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n  \"overall\": {");
    let _ = write!(
        out,
        "\"verdict\": {}, \"by\": {}, \"r\": {}, \"annotations\": [",
        json_string(overall.verdict.code()),
        overall
            .by
            .map(|id| json_string(id.code()))
            .unwrap_or_else(|| "null".into()),
        opt_u32(overall.iteration),
    );
    for (i, a) in overall.annotations.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&json_string(a));
    }
    out.push_str("]}\n}\n");
    out
}

/// Renders the simulation summary.
pub fn render_simulation_summary(traj: &osc_core::simulate::Trajectory) -> String {
    let mut out = String::new();
    out.push_str("{\n  \"sign_changes\": ");
    let _ = write!(out, "{}", traj.sign_changes().len());
    out.push_str(",\n  \"locations\": [");
    for (i, (a, b)) in traj.sign_changes().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "[{}, {}]", fmt_f64(*a), fmt_f64(*b));
    }
    out.push_str("],\n  \"final_value\": ");
    out.push_str(&fmt_f64(traj.final_value()));
    out.push_str(",\n  \"max_residual\": ");
    out.push_str(&fmt_f64(traj.max_residual()));
    out.push_str(",\n  \"zero_touches\": ");
    let _ = write!(out, "{}", traj.zero_touches().len());
    out.push_str("\n}\n");
    out
}
