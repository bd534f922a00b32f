//! `osc-test`: oscillation tests for first-order differential equations
//! with deviating arguments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use osc_cli::run::{
    ensure_thread_pool, parse_window, run_check, run_plot_data, run_simulate, CheckOptions,
    PlotOptions, SimulateOptions,
};

#[derive(Parser)]
#[command(
    name = "osc-test",
    about = "Oscillation tests for first-order delay and advanced differential equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn window_arg(s: &str) -> Result<(f64, f64), String> {
    parse_window(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every oscillation criterion and report a verdict.
    ///
    /// Exit codes: 0 oscillatory, 10 inconclusive, 2 validation failure,
    /// 1 file/parse error.
    Check {
        /// Problem file (JSON).
        problem: PathBuf,
        /// Highest kernel iteration r to evaluate.
        #[arg(long = "r-max")]
        r_max: Option<u32>,
        /// Grid step h (default 1e-3).
        #[arg(long = "step")]
        step: Option<f64>,
        /// Analysis window T0:T1 (default from the problem file).
        #[arg(long = "window", value_parser = window_arg)]
        window: Option<(f64, f64)>,
        /// Strictness margin added to every threshold (default 1e-6).
        #[arg(long = "margin")]
        margin: Option<f64>,
        /// Period hint for the limsup/liminf estimators.
        #[arg(long = "period")]
        period: Option<f64>,
        /// Write the JSON report here.
        #[arg(long = "report")]
        report: Option<PathBuf>,
        /// Write per-criterion sample curves into this directory.
        #[arg(long = "csv")]
        csv: Option<PathBuf>,
    },
    /// Integrate a delay problem by the method of steps.
    ///
    /// Exit codes: 0 done, 3 advanced problem (not simulable), 2 validation
    /// failure, 1 error.
    Simulate {
        /// Problem file (JSON).
        problem: PathBuf,
        /// History function as a standalone piecewise JSON file (defaults
        /// to the problem file's "history" entry).
        #[arg(long = "history")]
        history: Option<PathBuf>,
        /// Integration horizon T (default: the problem window end).
        #[arg(long = "horizon")]
        horizon: Option<f64>,
        /// Simulation step (default 1e-3).
        #[arg(long = "step")]
        step: Option<f64>,
        /// Write the summary JSON here.
        #[arg(long = "report")]
        report: Option<PathBuf>,
        /// Write trajectory.csv into this directory.
        #[arg(long = "csv")]
        csv: Option<PathBuf>,
    },
    /// Emit argument, envelope and functional curves as CSV files.
    #[command(name = "plot-data")]
    PlotData {
        /// Problem file (JSON).
        problem: PathBuf,
        /// Highest kernel iteration r for the functional curves.
        #[arg(long = "r-max")]
        r_max: Option<u32>,
        /// Grid step h (default 1e-3).
        #[arg(long = "step")]
        step: Option<f64>,
        /// Analysis window T0:T1 (default from the problem file).
        #[arg(long = "window", value_parser = window_arg)]
        window: Option<(f64, f64)>,
        /// Period hint for the limsup/liminf estimators.
        #[arg(long = "period")]
        period: Option<f64>,
        /// Output directory (default: current directory).
        #[arg(long = "csv")]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    ensure_thread_pool();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check {
            problem,
            r_max,
            step,
            window,
            margin,
            period,
            report,
            csv,
        } => run_check(
            &problem,
            &CheckOptions {
                r_max,
                step,
                window,
                margin,
                period,
                report,
                csv,
            },
        ),
        Command::Simulate {
            problem,
            history,
            horizon,
            step,
            report,
            csv,
        } => run_simulate(
            &problem,
            &SimulateOptions {
                history,
                horizon,
                step,
                report,
                csv,
            },
        ),
        Command::PlotData {
            problem,
            r_max,
            step,
            window,
            period,
            csv,
        } => run_plot_data(
            &problem,
            &PlotOptions {
                r_max,
                step,
                window,
                period,
                csv,
            },
        ),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(osc_cli::exit::ERROR)
        }
    }
}
