//! Command orchestration: check, simulate, plot-data.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use osc_core::criteria::{
    aggregate, single_delay_aliases, AdvancedAnalysis, CriterionReport, DelayAnalysis, EvalConfig,
    OverallVerdict, Verdict,
};
use osc_core::problem::{validate_advanced, validate_delay, ValidationReport};
use osc_core::simulate::{integrate_delay, reject_advanced};

use crate::csvio;
use crate::exit;
use crate::report::{fmt_f64, render_report, render_simulation_summary, ProblemMeta};
use crate::schema::{parse_piecewise, parse_problem, LoadedFile, LoadedProblem};

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    pub r_max: Option<u32>,
    pub step: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub margin: Option<f64>,
    pub period: Option<f64>,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    pub history: Option<PathBuf>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct PlotOptions {
    pub r_max: Option<u32>,
    pub step: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub period: Option<f64>,
    pub csv: Option<PathBuf>,
}

fn load(path: &Path) -> Result<LoadedFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_problem(&text).with_context(|| format!("in {}", path.display()))
}

fn eval_config(
    loaded: &LoadedFile,
    r_max: Option<u32>,
    step: Option<f64>,
    window: Option<(f64, f64)>,
    margin: Option<f64>,
    period: Option<f64>,
) -> EvalConfig {
    let mut cfg = EvalConfig::new(window.unwrap_or(loaded.window));
    if let Some(r) = r_max {
        cfg.r_max = r;
    }
    if let Some(h) = step {
        cfg.step = h;
    }
    if let Some(d) = margin {
        cfg.margin = d;
    }
    cfg.period_hint = period.or(loaded.period_hint);
    cfg
}

fn print_validation_failures(report: &ValidationReport) {
    println!("validation: FAIL");
    for failure in report.failures() {
        let witness = failure
            .witness
            .as_ref()
            .map(|w| {
                format!(
                    " (witness t = {}, value = {})",
                    fmt_f64(w.t),
                    fmt_f64(w.value)
                )
            })
            .unwrap_or_default();
        println!(
            "  term {}: hypothesis \"{}\" violated{}{}",
            failure.term + 1,
            failure.name,
            witness,
            if failure.detail.is_empty() {
                String::new()
            } else {
                format!(": {}", failure.detail)
            }
        );
    }
}

fn table_number(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e6 || x.abs() < 1e-4) {
        format!("{x:.6e}")
    } else {
        format!("{x:.9}")
    }
}

fn print_summary_table(reports: &[CriterionReport], overall: &OverallVerdict) {
    println!();
    println!(
        "{:<18} {:>4} {:>14} {:>14} {:>10}  verdict",
        "criterion", "r", "estimate", "threshold", "margin"
    );
    for c in reports {
        let r = c
            .iteration
            .map(|r| r.to_string())
            .unwrap_or_else(|| "-".into());
        let threshold = c.threshold.map(table_number).unwrap_or_else(|| "-".into());
        let margin = c
            .margin
            .map(|m| format!("{m:+.3e}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<18} {:>4} {:>14} {:>14} {:>10}  {}",
            c.id.code(),
            r,
            table_number(c.estimate),
            threshold,
            margin,
            c.verdict.code()
        );
    }
    println!();
    match overall.by {
        Some(id) => {
            let r = overall
                .iteration
                .map(|r| format!(" at r = {r}"))
                .unwrap_or_default();
            println!("overall: {} via {}{}", overall.verdict.code(), id.code(), r);
        }
        None => println!("overall: {}", overall.verdict.code()),
    }
    for a in &overall.annotations {
        println!("  {a}");
    }
}

fn write_criterion_csv(dir: &Path, reports: &[CriterionReport]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for c in reports {
        let name = match c.iteration {
            Some(r) => format!("criterion_{}_r{}.csv", c.id.code(), r),
            None => format!("criterion_{}.csv", c.id.code()),
        };
        csvio::write_samples(&dir.join(name), ("t", "f"), &c.samples)?;
    }
    Ok(())
}

enum Job {
    ClassicalLiminf,
    WeightedPointwise,
    PerEnvelopeLimsup,
    PerEnvelopeLiminf,
    IterLimsup(u32),
    IterLimsupAlpha(u32),
    IterLiminf(u32),
}

fn delay_reports(analysis: &DelayAnalysis) -> Result<Vec<CriterionReport>> {
    let mut jobs = vec![Job::ClassicalLiminf, Job::WeightedPointwise];
    for r in 1..=analysis.effective_r_max() {
        jobs.push(Job::IterLimsup(r));
        jobs.push(Job::IterLimsupAlpha(r));
        jobs.push(Job::IterLiminf(r));
    }
    let mut reports = jobs
        .par_iter()
        .map(|job| match job {
            Job::ClassicalLiminf => analysis.classical_liminf(),
            Job::WeightedPointwise => analysis.weighted_pointwise(),
            Job::IterLimsup(r) => analysis.iterated_limsup(*r),
            Job::IterLimsupAlpha(r) => analysis.iterated_limsup_alpha(*r),
            Job::IterLiminf(r) => analysis.iterated_liminf(*r),
            _ => unreachable!("advanced job in delay suite"),
        })
        .collect::<osc_core::Result<Vec<_>>>()
        .map_err(|e| anyhow!("criterion evaluation failed: {e}"))?;
    let aliases = single_delay_aliases(&reports, analysis.problem().term_count());
    reports.extend(aliases);
    Ok(reports)
}

fn advanced_reports(analysis: &AdvancedAnalysis) -> Result<Vec<CriterionReport>> {
    let mut jobs = vec![
        Job::ClassicalLiminf,
        Job::WeightedPointwise,
        Job::PerEnvelopeLimsup,
        Job::PerEnvelopeLiminf,
    ];
    for r in 1..=analysis.effective_r_max() {
        jobs.push(Job::IterLimsup(r));
        jobs.push(Job::IterLimsupAlpha(r));
        jobs.push(Job::IterLiminf(r));
    }
    jobs.par_iter()
        .map(|job| match job {
            Job::ClassicalLiminf => analysis.classical_liminf(),
            Job::WeightedPointwise => analysis.weighted_pointwise(),
            Job::PerEnvelopeLimsup => analysis.per_envelope_limsup(),
            Job::PerEnvelopeLiminf => analysis.per_envelope_liminf(),
            Job::IterLimsup(r) => analysis.iterated_limsup(*r),
            Job::IterLimsupAlpha(r) => analysis.iterated_limsup_alpha(*r),
            Job::IterLiminf(r) => analysis.iterated_liminf(*r),
        })
        .collect::<osc_core::Result<Vec<_>>>()
        .map_err(|e| anyhow!("criterion evaluation failed: {e}"))
}

/// `check`: validation, criteria, verdict; exit 0 oscillatory, 10
/// inconclusive, 2 validation failure.
pub fn run_check(path: &Path, opts: &CheckOptions) -> Result<u8> {
    let loaded = load(path)?;
    let cfg = eval_config(
        &loaded,
        opts.r_max,
        opts.step,
        opts.window,
        opts.margin,
        opts.period,
    );
    println!(
        "problem: {} ({}, m = {})",
        path.display(),
        loaded.problem.kind_name(),
        loaded.problem.term_count()
    );
    println!(
        "window [{}, {}], step {}, r_max {}, margin {}, period hint {}",
        fmt_f64(cfg.window.0),
        fmt_f64(cfg.window.1),
        fmt_f64(cfg.step),
        cfg.r_max,
        fmt_f64(cfg.margin),
        cfg.period_hint
            .map(fmt_f64)
            .unwrap_or_else(|| "none".into()),
    );

    let validation = match &loaded.problem {
        LoadedProblem::Delay(p) => validate_delay(p, cfg.window, cfg.step)
            .map_err(|e| anyhow!("validation failed to run: {e}"))?,
        LoadedProblem::Advanced(p) => validate_advanced(p, cfg.window, cfg.step)
            .map_err(|e| anyhow!("validation failed to run: {e}"))?,
    };
    if !validation.passed() {
        print_validation_failures(&validation);
        return Ok(exit::VALIDATION);
    }
    match validation.advance_bound {
        Some(bound) => println!("validation: PASS (advance bound {})", fmt_f64(bound)),
        None => println!("validation: PASS"),
    }

    let divergence_note = |available: u32, diverged: Option<u32>| {
        if let Some(at) = diverged {
            if available < cfg.r_max {
                println!(
                    "note: kernel weights diverge at iteration r = {at}; \
                     iterations above r = {available} omitted"
                );
            }
        }
    };
    let reports = match &loaded.problem {
        LoadedProblem::Delay(p) => {
            let analysis = DelayAnalysis::new(p.clone(), cfg)
                .map_err(|e| anyhow!("analysis setup failed: {e}"))?;
            divergence_note(analysis.effective_r_max(), analysis.kernels().diverged_at());
            delay_reports(&analysis)?
        }
        LoadedProblem::Advanced(p) => {
            let analysis = AdvancedAnalysis::new(p.clone(), cfg)
                .map_err(|e| anyhow!("analysis setup failed: {e}"))?;
            divergence_note(analysis.effective_r_max(), analysis.kernels().diverged_at());
            advanced_reports(&analysis)?
        }
    };
    let overall = aggregate(&reports);
    print_summary_table(&reports, &overall);

    if let Some(report_path) = &opts.report {
        let meta = ProblemMeta {
            path: &path.display().to_string(),
            kind: loaded.problem.kind_name(),
            terms: loaded.problem.term_count(),
            window: cfg.window,
            step: cfg.step,
            r_max: cfg.r_max,
            margin: cfg.margin,
            period_hint: cfg.period_hint,
        };
        fs::write(report_path, render_report(&meta, &reports, &overall))
            .with_context(|| format!("writing {}", report_path.display()))?;
    }
    if let Some(dir) = &opts.csv {
        write_criterion_csv(dir, &reports)?;
    }

    Ok(if overall.verdict == Verdict::Oscillatory {
        exit::OSCILLATORY
    } else {
        exit::INCONCLUSIVE
    })
}

/// `simulate`: method-of-steps integration of a delay problem.
pub fn run_simulate(path: &Path, opts: &SimulateOptions) -> Result<u8> {
    let loaded = load(path)?;
    let problem = match &loaded.problem {
        LoadedProblem::Advanced(_) => {
            eprintln!("{}", reject_advanced());
            return Ok(exit::ADVANCED_SIMULATION);
        }
        LoadedProblem::Delay(p) => p.clone(),
    };
    let horizon = opts.horizon.unwrap_or(loaded.window.1);
    let step = opts.step.unwrap_or(1e-3);

    // well-posedness only: the simulator needs nonnegative coefficients and
    // genuine delays, but not the asymptotic limit hypothesis
    let validation = validate_delay(&problem, (problem.base_start(), horizon), step.max(1e-3))
        .map_err(|e| anyhow!("validation failed to run: {e}"))?;
    let blocking: Vec<_> = validation
        .failures()
        .filter(|c| c.name != "tau(t) -> infinity")
        .collect();
    if !blocking.is_empty() {
        print_validation_failures(&validation);
        return Ok(exit::VALIDATION);
    }

    let history = match &opts.history {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            osc_core::problem::HistoryFunction::new(parse_piecewise(&text)?)
        }
        None => loaded.history.clone().ok_or_else(|| {
            anyhow!("no history: the problem file has none and --history was not given")
        })?,
    };

    let traj = integrate_delay(&problem, &history, horizon, step)
        .map_err(|e| anyhow!("integration failed: {e}"))?;
    println!(
        "simulated {} steps on [{}, {}]",
        traj.times().len() - 1,
        fmt_f64(problem.base_start()),
        fmt_f64(horizon)
    );
    println!(
        "sign changes: {}{}",
        traj.sign_changes().len(),
        traj.sign_changes()
            .first()
            .map(|(a, b)| format!(" (first in [{}, {}])", fmt_f64(*a), fmt_f64(*b)))
            .unwrap_or_default()
    );
    println!("final value: {}", fmt_f64(traj.final_value()));
    println!(
        "max residual (central differences): {}",
        fmt_f64(traj.max_residual())
    );

    if let Some(report_path) = &opts.report {
        fs::write(report_path, render_simulation_summary(&traj))
            .with_context(|| format!("writing {}", report_path.display()))?;
    }
    if let Some(dir) = &opts.csv {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        csvio::write_columns(
            &dir.join("trajectory.csv"),
            ("t", "x"),
            traj.times(),
            traj.values(),
        )?;
    }
    Ok(exit::OSCILLATORY)
}

/// `plot-data`: argument, envelope and functional curves as CSV.
pub fn run_plot_data(path: &Path, opts: &PlotOptions) -> Result<u8> {
    let loaded = load(path)?;
    let cfg = eval_config(
        &loaded,
        opts.r_max,
        opts.step,
        opts.window,
        None,
        opts.period,
    );
    let dir = opts.csv.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let validation = match &loaded.problem {
        LoadedProblem::Delay(p) => validate_delay(p, cfg.window, cfg.step),
        LoadedProblem::Advanced(p) => validate_advanced(p, cfg.window, cfg.step),
    }
    .map_err(|e| anyhow!("validation failed to run: {e}"))?;
    if !validation.passed() {
        print_validation_failures(&validation);
        return Ok(exit::VALIDATION);
    }

    match &loaded.problem {
        LoadedProblem::Delay(p) => {
            let analysis = DelayAnalysis::new(p.clone(), cfg)
                .map_err(|e| anyhow!("analysis setup failed: {e}"))?;
            let grid = analysis.grid();
            let (lo, hi) = grid.node_range(cfg.window.0, cfg.window.1);
            let times = &grid.nodes()[lo..hi];
            for (i, term) in p.terms().iter().enumerate() {
                let samples: Vec<(f64, f64)> = times
                    .iter()
                    .map(|&t| (t, term.argument.eval(t).unwrap_or(f64::NAN)))
                    .collect();
                csvio::write_samples(
                    &dir.join(format!("tau_{}.csv", i + 1)),
                    ("t", "tau"),
                    &samples,
                )?;
                let env = &analysis.term_envelopes()[i];
                csvio::write_columns(
                    &dir.join(format!("g_{}.csv", i + 1)),
                    ("t", "g"),
                    times,
                    &env.values()[lo..hi],
                )?;
            }
            csvio::write_columns(
                &dir.join("g.csv"),
                ("t", "g"),
                times,
                &analysis.envelope().values()[lo..hi],
            )?;
            for r in 1..=analysis.effective_r_max() {
                let report = analysis
                    .iterated_limsup(r)
                    .map_err(|e| anyhow!("functional evaluation failed: {e}"))?;
                csvio::write_samples(
                    &dir.join(format!("f_r{r}.csv")),
                    ("t", "f"),
                    &report.samples,
                )?;
            }
        }
        LoadedProblem::Advanced(p) => {
            let analysis = AdvancedAnalysis::new(p.clone(), cfg)
                .map_err(|e| anyhow!("analysis setup failed: {e}"))?;
            let grid = analysis.grid();
            let (lo, hi) = grid.node_range(cfg.window.0, cfg.window.1);
            let times = &grid.nodes()[lo..hi];
            for (i, term) in p.terms().iter().enumerate() {
                let samples: Vec<(f64, f64)> = times
                    .iter()
                    .map(|&t| (t, term.argument.eval(t).unwrap_or(f64::NAN)))
                    .collect();
                csvio::write_samples(
                    &dir.join(format!("sigma_{}.csv", i + 1)),
                    ("t", "sigma"),
                    &samples,
                )?;
                let env = &analysis.term_envelopes()[i];
                csvio::write_columns(
                    &dir.join(format!("rho_{}.csv", i + 1)),
                    ("t", "rho"),
                    times,
                    &env.values()[lo..hi],
                )?;
            }
            csvio::write_columns(
                &dir.join("rho.csv"),
                ("t", "rho"),
                times,
                &analysis.envelope().values()[lo..hi],
            )?;
            for r in 1..=analysis.effective_r_max() {
                let report = analysis
                    .iterated_limsup(r)
                    .map_err(|e| anyhow!("functional evaluation failed: {e}"))?;
                csvio::write_samples(
                    &dir.join(format!("f_r{r}.csv")),
                    ("t", "f"),
                    &report.samples,
                )?;
            }
        }
    }
    println!("plot data written to {}", dir.display());
    Ok(exit::OSCILLATORY)
}

pub fn ensure_thread_pool() {
    if let Ok(value) = std::env::var("OSC_TEST_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

/// Shared helper for window arguments of the form `T0:T1`.
pub fn parse_window(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("window must be given as T0:T1"))?;
    let a: f64 = a.trim().parse().context("window start")?;
    let b: f64 = b.trim().parse().context("window end")?;
    if !(b > a) {
        bail!("window end must exceed window start");
    }
    Ok((a, b))
}
