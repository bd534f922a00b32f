//! Acceptance suite: every numbered acceptance criterion is one or more
//! `acceptance_*` tests below, asserting the published reference values at
//! their stated tolerances. The CLI-level criteria drive the real binary
//! on the shipped fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

use osc_core::criteria::{DelayAnalysis, EvalConfig, Verdict};
use osc_core::grid::build_grid;
use osc_core::kernel::{autonomous_lambda, build_kernel_delay};
use osc_core::piecewise::PiecewiseCellFunction;
use osc_core::problem::{DelayProblem, HistoryFunction, Term};
use osc_core::simulate::{count_sign_changes, integrate_delay, residual_check};
use osc_core::table::cumulative;

const P_HALF: f64 = 0.3032653298563167; // 0.5 e^{-0.5}
const INV_E: f64 = 0.36787944117144233;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osc-test"))
        .args(args)
        .output()
        .expect("spawning osc-test")
}

fn read_fixture_problem(name: &str) -> osc_cli::schema::LoadedFile {
    let text = std::fs::read_to_string(fixture(name)).expect("fixture readable");
    osc_cli::schema::parse_problem(&text).expect("fixture parses")
}

fn criterion_entry<'a>(report: &'a Value, id: &str, r: Option<u64>) -> &'a Value {
    report["criteria"]
        .as_array()
        .expect("criteria array")
        .iter()
        .find(|c| {
            c["id"].as_str() == Some(id)
                && match r {
                    Some(r) => c["r"].as_u64() == Some(r),
                    None => c["r"].is_null(),
                }
        })
        .unwrap_or_else(|| panic!("criterion {id} r={r:?} missing from report"))
}

fn autonomous(p: f64) -> DelayProblem {
    let tau = PiecewiseCellFunction::new(
        0.0,
        None,
        vec![osc_core::piecewise::Cell::affine(
            0.0,
            f64::INFINITY,
            -1.0,
            1.0,
            0.0,
        )],
    )
    .unwrap();
    DelayProblem::new(vec![Term {
        coefficient: PiecewiseCellFunction::constant(0.0, p),
        argument: tau,
    }])
    .unwrap()
}

// ----------------------------------------------------------------------
// Criterion 1: autonomous kernel table, closed-form path, 6 decimals.
// ----------------------------------------------------------------------

#[test]
fn acceptance_01_autonomous_decay_table() {
    let start = Instant::now();
    let table = [
        (P_HALF, 1u32, 0.738403),
        (P_HALF, 2, 0.663183),
        (P_HALF, 10, 0.606725),
        (P_HALF, 18, 0.606531),
        (INV_E, 1, 0.692201),
        (INV_E, 2, 0.587744),
        (INV_E, 10, 0.430949),
        (INV_E, 50, 0.381994),
        (INV_E, 100, 0.375068),
        (INV_E, 1000, 0.368613),
    ];
    for (p, r, want) in table {
        let lam = autonomous_lambda(p, r).unwrap();
        let inv = 1.0 / lam;
        assert!(
            (inv - want).abs() < 5e-7,
            "p = {p}, r = {r}: a_r^-1 = {inv:.6} expected {want}"
        );
    }
    assert!(
        start.elapsed().as_millis() < 1000,
        "closed-form path must be fast"
    );
}

// ----------------------------------------------------------------------
// Criterion 2: generic kernel pipeline reproduces the table within 1e-4.
// ----------------------------------------------------------------------

#[test]
fn acceptance_02_generic_pipeline_consistency() {
    let start = Instant::now();
    let problem = autonomous(P_HALF);
    let grid = build_grid(&problem.functions(), (0.0, 30.0), 1e-3, 0.0).unwrap();
    let tables = build_kernel_delay(&problem, &grid, 18).unwrap();
    // r = 18 sits past the acceptance list but is a published table value
    // the generic path reproduces once the warm-up band is cleared
    for (r, want) in [
        (1u32, 0.738403),
        (2, 0.663183),
        (10, 0.606725),
        (18, 0.606531),
    ] {
        let a = tables.eval_a(r, 25.0, 24.0).unwrap();
        assert!(
            (1.0 / a - want).abs() < 1e-4,
            "r = {r}: {} expected {want}",
            1.0 / a
        );
    }
    assert!(
        start.elapsed().as_secs() < 10,
        "pipeline consistency must finish in < 10 s"
    );
}

// ----------------------------------------------------------------------
// Criterion 3: the two-delay fixture through the CLI.
// ----------------------------------------------------------------------

fn ex31_report() -> Value {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let started = Instant::now();
    let out = run_cli(&[
        "check",
        fixture("ex31.json").to_str().unwrap(),
        "--r-max",
        "1",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert!(
        started.elapsed().as_secs() < 30,
        "ex31 check must finish in < 30 s"
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap()
}

#[test]
fn acceptance_03a_ex31_iterated_limsup_estimate() {
    let report = ex31_report();
    let estimate = criterion_entry(&report, "THM_2_4", Some(1))["estimate"]
        .as_f64()
        .unwrap();
    assert!(
        (estimate - 1.22696).abs() <= 1e-3,
        "THM_2_4 r=1 estimate {estimate:.6} differs from the published reference 1.22696 \
         by more than 1e-3 (the faithful periodic maximum of the functional is ~1.20362)"
    );
}

#[test]
fn acceptance_03b_ex31_oscillatory_verdict() {
    let report = ex31_report();
    let entry = criterion_entry(&report, "THM_2_4", Some(1));
    assert_eq!(entry["verdict"].as_str(), Some("OSCILLATORY"));
    assert_eq!(report["overall"]["verdict"].as_str(), Some("OSCILLATORY"));
    // the aggregate cites the iterated limsup test at its first level
    assert_eq!(report["overall"]["by"].as_str(), Some("THM_2_4"));
    assert_eq!(report["overall"]["r"].as_u64(), Some(1));
}

#[test]
fn acceptance_03c_ex31_classical_liminf_value() {
    let report = ex31_report();
    let entry = criterion_entry(&report, "LADDE_1_8", None);
    let estimate = entry["estimate"].as_f64().unwrap();
    let want = 2.1 / (2.2 * std::f64::consts::E);
    assert!(
        (estimate - want).abs() <= 1e-6,
        "{estimate} vs 2.1/(2.2e) = {want}"
    );
    assert_eq!(entry["verdict"].as_str(), Some("INCONCLUSIVE"));
}

#[test]
fn acceptance_03d_ex31_weighted_pointwise_value() {
    let report = ex31_report();
    let entry = criterion_entry(&report, "HUNT_YORKE_1_10", None);
    let estimate = entry["estimate"].as_f64().unwrap();
    assert!((estimate - INV_E).abs() <= 1e-9, "{estimate} vs 1/e");
    // the value sits exactly on the threshold: the strict-inequality margin
    // must keep the verdict inconclusive
    assert_eq!(entry["verdict"].as_str(), Some("INCONCLUSIVE"));
}

// ----------------------------------------------------------------------
// Criterion 4: the two-advance fixture through the CLI.
// ----------------------------------------------------------------------

fn ex32_report() -> Value {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let started = Instant::now();
    let out = run_cli(&[
        "check",
        fixture("ex32.json").to_str().unwrap(),
        "--r-max",
        "2",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert!(
        started.elapsed().as_secs() < 60,
        "ex32 check must finish in < 60 s"
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap()
}

#[test]
fn acceptance_04a_ex32_level_one_estimate() {
    let report = ex32_report();
    let estimate = criterion_entry(&report, "THM_2_4A", Some(1))["estimate"]
        .as_f64()
        .unwrap();
    assert!(
        (estimate - 0.777403).abs() <= 1e-3,
        "THM_2_4A r=1 estimate {estimate:.6} differs from the published reference 0.777403 \
         by more than 1e-3 (0.777403 is the functional value at the period anchor; the \
         faithful periodic maximum is ~1.551259)"
    );
}

#[test]
fn acceptance_04b_ex32_level_one_verdict() {
    let report = ex32_report();
    let verdict = criterion_entry(&report, "THM_2_4A", Some(1))["verdict"]
        .as_str()
        .unwrap();
    assert_eq!(
        verdict, "INCONCLUSIVE",
        "published presentation expects the level-1 test to stay below 1; the faithful \
         periodic maximum already exceeds it"
    );
}

#[test]
fn acceptance_04c_ex32_level_two_estimate() {
    let report = ex32_report();
    let estimate = criterion_entry(&report, "THM_2_4A", Some(2))["estimate"]
        .as_f64()
        .unwrap();
    assert!(
        (estimate - 1.558893).abs() <= 1e-3,
        "THM_2_4A r=2 estimate {estimate:.6} differs from the published reference 1.558893 \
         by more than 1e-3 (the faithful periodic maximum is ~4.954881)"
    );
}

#[test]
fn acceptance_04d_ex32_level_two_verdict() {
    let report = ex32_report();
    let entry = criterion_entry(&report, "THM_2_4A", Some(2));
    assert_eq!(entry["verdict"].as_str(), Some("OSCILLATORY"));
    assert_eq!(report["overall"]["verdict"].as_str(), Some("OSCILLATORY"));
}

#[test]
fn acceptance_04e_ex32_classical_liminf_value() {
    let report = ex32_report();
    let entry = criterion_entry(&report, "LADAS_ADV_1_9", None);
    let estimate = entry["estimate"].as_f64().unwrap();
    assert!((estimate - 0.35).abs() <= 1e-9, "{estimate} vs 7/20");
    assert_eq!(entry["verdict"].as_str(), Some("INCONCLUSIVE"));
}

#[test]
fn acceptance_04f_ex32_weighted_pointwise_value() {
    let report = ex32_report();
    let entry = criterion_entry(&report, "ZHOU_1_11", None);
    let estimate = entry["estimate"].as_f64().unwrap();
    assert!((estimate - 0.3675).abs() <= 1e-9, "{estimate} vs 0.3675");
    assert_eq!(entry["verdict"].as_str(), Some("INCONCLUSIVE"));
}

// ----------------------------------------------------------------------
// Criterion 5: the recurring-constant-argument fixture.
// ----------------------------------------------------------------------

#[test]
fn acceptance_05a_ex22_validation_flags_limit_hypothesis() {
    let out = run_cli(&["check", fixture("ex22.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("tau(t) -> infinity"), "stdout: {stdout}");
}

#[test]
fn acceptance_05b_ex22_raw_integrand_mass() {
    // the coefficient mass over [2k, 2k+0.8] is 1.6, above the threshold 1,
    // even though the equation admits a nonoscillatory solution
    let loaded = read_fixture_problem("ex22.json");
    let problem = match loaded.problem {
        osc_cli::schema::LoadedProblem::Delay(p) => p,
        _ => unreachable!(),
    };
    let grid = build_grid(&problem.functions(), (0.0, 20.0), 1e-3, 0.0).unwrap();
    let table = cumulative(&grid, |t, side| problem.coefficient_sum(t, side)).unwrap();
    for k in [0.0f64, 4.0, 9.0] {
        let mass = table.integral_between(2.0 * k, 2.0 * k + 0.8).unwrap();
        assert!((mass - 1.6).abs() <= 1e-9, "k = {k}: {mass}");
    }
}

#[test]
fn acceptance_05c_ex22_corrected_candidate_residual() {
    let loaded = read_fixture_problem("ex22.json");
    let problem = match loaded.problem {
        osc_cli::schema::LoadedProblem::Delay(p) => p,
        _ => unreachable!(),
    };
    let history = loaded.history.expect("fixture ships its history");
    // x(-1) = phi(-1) = 0 anchors the flat pieces
    assert_eq!(history.eval(-1.0).unwrap(), 0.0);
    let text = std::fs::read_to_string(fixture("ex22_solution.json")).unwrap();
    let candidate = osc_cli::schema::parse_piecewise(&text).unwrap();
    let grid = build_grid(&problem.functions(), (0.0, 14.0), 1e-3, 0.0).unwrap();
    let residual = residual_check(&problem, &candidate, &history, &grid).unwrap();
    assert!(residual <= 1e-10, "residual {residual}");
}

// ----------------------------------------------------------------------
// Criterion 6: property suites. The >= 200-case suites live in the core
// crate (tests/properties.rs, tests/oracle.rs); this spot check keeps one
// representative of each family in the acceptance run.
// ----------------------------------------------------------------------

#[test]
fn acceptance_06_property_suite_spot_checks() {
    // kernel cocycle + monotonicity
    let problem = autonomous(P_HALF);
    let grid = build_grid(&problem.functions(), (0.0, 20.0), 1e-3, 0.0).unwrap();
    let tables = build_kernel_delay(&problem, &grid, 3).unwrap();
    let (u, s, t) = (5.3, 9.7, 14.2);
    for r in 1..=3 {
        let lhs = tables.eval_a(r, t, s).unwrap() * tables.eval_a(r, s, u).unwrap();
        let rhs = tables.eval_a(r, t, u).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs, "cocycle at r = {r}");
        if r > 1 {
            assert!(tables.eval_a(r, t, s).unwrap() >= tables.eval_a(r - 1, t, s).unwrap());
        }
    }
    // quadrature additivity
    let mass = cumulative(&grid, |x, side| problem.coefficient_sum(x, side)).unwrap();
    let lhs = mass.integral_between(1.1, 7.7).unwrap() + mass.integral_between(7.7, 13.4).unwrap();
    let rhs = mass.integral_between(1.1, 13.4).unwrap();
    assert!((lhs - rhs).abs() < 1e-13);
    // grid refinement moves the fixture estimate by far less than 5e-3
    let loaded = read_fixture_problem("ex31.json");
    let problem = match loaded.problem {
        osc_cli::schema::LoadedProblem::Delay(p) => p,
        _ => unreachable!(),
    };
    let est = |h: f64| {
        let mut cfg = EvalConfig::new((1.0, 13.0));
        cfg.period_hint = Some(2.0);
        cfg.r_max = 1;
        cfg.step = h;
        DelayAnalysis::new(problem.clone(), cfg)
            .unwrap()
            .iterated_limsup(1)
            .unwrap()
            .estimate
    };
    assert!((est(2e-3) - est(1e-3)).abs() < 5e-3);
}

// ----------------------------------------------------------------------
// Criterion 7: never-false-positive guard for the nonoscillatory
// autonomous family, all criteria up to r = 100.
// ----------------------------------------------------------------------

#[test]
fn acceptance_07_never_false_positive_guard() {
    for p in [0.1 * INV_E, P_HALF, INV_E] {
        let mut cfg = EvalConfig::new((0.0, 130.0));
        cfg.step = 1e-2;
        cfg.r_max = 100;
        cfg.period_hint = Some(1.0);
        let analysis = DelayAnalysis::new(autonomous(p), cfg).unwrap();
        for report in analysis.all_reports().unwrap() {
            assert_eq!(
                report.verdict,
                Verdict::Inconclusive,
                "false positive: p = {p}, criterion {} r = {:?} estimate {} vs threshold {:?}",
                report.id.code(),
                report.iteration,
                report.estimate,
                report.threshold
            );
        }
    }
}

// ----------------------------------------------------------------------
// Criterion 8: simulation corroboration.
// ----------------------------------------------------------------------

#[test]
fn acceptance_08a_critical_fixture_tracks_exact_solution() {
    let loaded = read_fixture_problem("ex21_alpha1.json");
    let problem = match loaded.problem {
        osc_cli::schema::LoadedProblem::Delay(p) => p,
        _ => unreachable!(),
    };
    let history = loaded.history.expect("fixture ships phi = e^{-t}");
    let traj = integrate_delay(&problem, &history, 10.0, 1e-3).unwrap();
    let mut worst = 0.0f64;
    for (t, x) in traj.times().iter().zip(traj.values()) {
        worst = worst.max((x - (-t).exp()).abs());
    }
    assert!(worst < 1e-5, "max deviation {worst}");
    assert_eq!(count_sign_changes(&traj), 0);
}

#[test]
fn acceptance_08b_ex31_trajectory_changes_sign_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("summary.json");
    let out = run_cli(&[
        "simulate",
        fixture("ex31.json").to_str().unwrap(),
        "--horizon",
        "100",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    assert!(summary["sign_changes"].as_u64().unwrap() >= 1);
}

#[test]
fn acceptance_08c_decay_estimate_bound_holds_on_trajectory() {
    // x(t) a_r(t, s) <= x(s) (1 + eps) on positive stretches, eps = 10 h
    let h = 1e-3;
    let problem = autonomous(P_HALF);
    let history = HistoryFunction::new(
        PiecewiseCellFunction::new(
            -2.0,
            None,
            vec![osc_core::piecewise::Cell {
                lower: 0.0,
                upper: f64::INFINITY,
                c0: 1.0,
                c1: 0.0,
                c2: 0.0,
                d0: 0.0,
                d1: -0.5,
                d2: 0.0,
            }],
        )
        .unwrap(),
    );
    let traj = integrate_delay(&problem, &history, 20.0, h).unwrap();
    assert_eq!(
        count_sign_changes(&traj),
        0,
        "trajectory must stay positive"
    );
    let grid = build_grid(&problem.functions(), (0.0, 20.0), h, 0.0).unwrap();
    let tables = build_kernel_delay(&problem, &grid, 3).unwrap();
    let eps = 10.0 * h;
    for r in 1..=3 {
        let mut s = 4.0;
        while s < 18.0 {
            let mut t = s;
            while t < 19.0 {
                let xs = traj.eval(s).unwrap();
                let xt = traj.eval(t).unwrap();
                let a = tables.eval_a(r, t, s).unwrap();
                assert!(
                    xt * a <= xs * (1.0 + eps),
                    "r = {r}, (t, s) = ({t}, {s}): {} > {}",
                    xt * a,
                    xs * (1.0 + eps)
                );
                t += 0.71;
            }
            s += 1.13;
        }
    }
}
