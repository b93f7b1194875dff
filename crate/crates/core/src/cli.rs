//! Command-line driver.
//!
//! Subcommands: `simulate` (run a scenario episode, write artifact tables),
//! `fit` (batch-fit a belief to an observations file, write the bounds
//! trace), `predict` (print trust for a requirement vector under a saved
//! belief snapshot), and `report` (aggregate metrics across run
//! directories). Data goes to files; only `predict` prints its scalar to
//! stdout. Diagnostics go to stderr with distinct exit codes per error
//! class.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::capability::CapabilitySpace;
use crate::fit::{batch_fit, DEFAULT_FIT_TOL, DEFAULT_MAX_SWEEPS};
use crate::scenario::{observation_dims, parse_observations_str, parse_scenario, ScenarioError};
use crate::sim::{compute_metrics, run_episode, Allocator, Scenario, SimError};
use crate::snapshot::{load_belief, save_belief, SnapshotError};
use crate::tables;
use crate::trust::{SuccessModel, TrustError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_COMPUTE: i32 = 5;
pub const EXIT_IO: i32 = 6;

/// Environment variable overriding the scenario seed for `simulate`.
pub const SEED_ENV_VAR: &str = "TRUSTALLOC_SEED";

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: impl ToString) -> Self {
        CliError {
            code,
            message: message.to_string(),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        let code = match &e {
            ScenarioError::Io { .. } => EXIT_IO,
            ScenarioError::Parse(_) => EXIT_PARSE,
            ScenarioError::Validation { .. } => EXIT_VALIDATION,
        };
        CliError::new(code, e)
    }
}

impl From<SnapshotError> for CliError {
    fn from(e: SnapshotError) -> Self {
        let code = match &e {
            SnapshotError::Io(_) => EXIT_IO,
            SnapshotError::Malformed { .. } => EXIT_PARSE,
            SnapshotError::Invalid(_) => EXIT_VALIDATION,
        };
        CliError::new(code, e)
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        // Scenario validation happens at parse time; errors surfacing from a
        // run are computation failures (e.g. a contradictory observation).
        CliError::new(EXIT_COMPUTE, e)
    }
}

impl From<TrustError> for CliError {
    fn from(e: TrustError) -> Self {
        let code = match &e {
            TrustError::ImpossibleObservation => EXIT_COMPUTE,
            TrustError::BadModelString(_) => EXIT_PARSE,
            _ => EXIT_VALIDATION,
        };
        CliError::new(code, e)
    }
}

fn io_err(context: &str, e: std::io::Error) -> CliError {
    CliError::new(EXIT_IO, format!("{context}: {e}"))
}

#[derive(Parser, Debug)]
#[command(
    name = "trustalloc",
    version,
    about = "Trust-based task allocation simulator for a human-robot team"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario episode and write artifact tables
    Simulate {
        /// Scenario TOML file
        scenario: PathBuf,
        /// Directory receiving episode_log.csv, bounds_trace.csv,
        /// l1_trace.csv, and metrics.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a capability belief to observed outcomes and write its bounds trace
    Fit {
        /// Observations file: rows of requirement components then S|F
        observations: PathBuf,
        /// Directory receiving bounds_trace.csv and fit_summary.csv
        #[arg(long)]
        out: PathBuf,
        /// Grid points per capability dimension
        #[arg(long, default_value_t = CapabilitySpace::DEFAULT_GRID_RESOLUTION)]
        grid: usize,
        /// Success model assumed for belief updates
        #[arg(long, default_value = "sigmoid:0.05")]
        model: String,
        /// Stop when no credible bound moves more than this across a sweep
        #[arg(long, default_value_t = DEFAULT_FIT_TOL)]
        tol: f64,
        /// Sweep budget over the observation list
        #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
        max_sweeps: usize,
        /// Known true capabilities (comma-separated) for the trace's
        /// reference column
        #[arg(long)]
        true_capabilities: Option<String>,
        /// Also write the fitted belief snapshot to this path
        #[arg(long)]
        save_belief: Option<PathBuf>,
    },
    /// Print trust for a requirement vector under a saved belief snapshot
    Predict {
        /// Belief snapshot file
        #[arg(long)]
        belief: PathBuf,
        /// Requirement vector, comma-separated
        #[arg(long)]
        requirements: String,
        /// Success model for the prediction
        #[arg(long, default_value = "step")]
        model: String,
    },
    /// Aggregate metrics.csv tables from run directories into a report
    Report {
        /// Directory whose subdirectories hold metrics.csv files
        dir: PathBuf,
    },
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate { scenario, out } => simulate(&scenario, &out),
        Command::Fit {
            observations,
            out,
            grid,
            model,
            tol,
            max_sweeps,
            true_capabilities,
            save_belief,
        } => fit(
            &observations,
            &out,
            grid,
            &model,
            tol,
            max_sweeps,
            true_capabilities.as_deref(),
            save_belief.as_deref(),
        ),
        Command::Predict {
            belief,
            requirements,
            model,
        } => predict(&belief, &requirements, &model),
        Command::Report { dir } => report(&dir),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("trustalloc: {}", e.message);
            e.code
        }
    }
}

fn seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) if text.trim().is_empty() => Ok(None),
        Ok(text) => text.trim().parse::<u64>().map(Some).map_err(|_| {
            CliError::new(
                EXIT_PARSE,
                format!("{SEED_ENV_VAR} must be an unsigned integer, got `{text}`"),
            )
        }),
        Err(_) => Ok(None),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(&format!("writing {}", path.display()), e))
}

fn simulate(scenario_path: &Path, out: &Path) -> Result<(), CliError> {
    let mut scenario = parse_scenario(scenario_path)?;
    if let Some(seed) = seed_override()? {
        scenario.seed = seed;
    }
    let log = run_episode(&scenario)?;
    // The omniscient companion run of the same scenario prices the regret.
    let oracle_log = run_episode(&Scenario {
        allocator: Allocator::Omniscient,
        ..scenario.clone()
    })?;
    let metrics = compute_metrics(&log, &scenario, Some(&oracle_log));
    fs::create_dir_all(out).map_err(|e| io_err(&format!("creating {}", out.display()), e))?;
    write_file(&out.join("episode_log.csv"), &tables::episode_log_csv(&log))?;
    write_file(
        &out.join("bounds_trace.csv"),
        &tables::episode_bounds_csv(&scenario, &log),
    )?;
    write_file(
        &out.join("l1_trace.csv"),
        &tables::l1_trace_csv(&metrics.l1_error_trace),
    )?;
    write_file(&out.join("metrics.csv"), &tables::metrics_csv(&metrics))?;
    Ok(())
}

fn parse_vector_arg(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|f| {
            f.trim().parse::<f64>().map_err(|_| {
                CliError::new(
                    EXIT_PARSE,
                    format!("{name}: bad component `{}` in `{text}`", f.trim()),
                )
            })
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn fit(
    observations_path: &Path,
    out: &Path,
    grid: usize,
    model: &str,
    tol: f64,
    max_sweeps: usize,
    true_capabilities: Option<&str>,
    save_belief_path: Option<&Path>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(observations_path)
        .map_err(|e| io_err(&format!("reading {}", observations_path.display()), e))?;
    let n = observation_dims(&text).map_err(CliError::from)?;
    let space = CapabilitySpace::new(n, grid)
        .map_err(|e| CliError::new(EXIT_VALIDATION, format!("--grid: {e}")))?;
    let observations = parse_observations_str(&text, &space)?;
    let model: SuccessModel = model.parse()?;
    let truth: Option<Vec<f64>> = match true_capabilities {
        Some(text) => {
            let values = parse_vector_arg("--true-capabilities", text)?;
            space
                .check_values(&values)
                .map_err(|e| CliError::new(EXIT_VALIDATION, format!("--true-capabilities: {e}")))?;
            Some(values)
        }
        None => None,
    };
    let (belief, trace) = batch_fit(&space, &observations, &model, tol, max_sweeps)?;
    fs::create_dir_all(out).map_err(|e| io_err(&format!("creating {}", out.display()), e))?;
    write_file(
        &out.join("bounds_trace.csv"),
        &tables::fit_bounds_csv(&trace, truth.as_deref()),
    )?;
    write_file(
        &out.join("fit_summary.csv"),
        &tables::fit_summary_csv(&trace),
    )?;
    if let Some(path) = save_belief_path {
        save_belief(&belief, path)?;
    }
    if !trace.converged {
        eprintln!(
            "trustalloc: fit hit the sweep budget ({}) before bounds settled",
            trace.sweeps
        );
    }
    Ok(())
}

fn predict(belief_path: &Path, requirements: &str, model: &str) -> Result<(), CliError> {
    let belief = load_belief(belief_path)?;
    let requirements = parse_vector_arg("--requirements", requirements)?;
    let model: SuccessModel = model.parse()?;
    let tau = belief
        .predict_trust(&requirements, &model)
        .map_err(|e| CliError::new(EXIT_VALIDATION, format!("--requirements: {e}")))?;
    println!("{tau}");
    Ok(())
}

fn report(dir: &Path) -> Result<(), CliError> {
    let entries =
        fs::read_dir(dir).map_err(|e| io_err(&format!("reading {}", dir.display()), e))?;
    let mut run_dirs: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| io_err("scanning run directories", e))?;
        let path = entry.path();
        if path.is_dir() && path.join("metrics.csv").is_file() {
            run_dirs.push(path);
        }
    }
    run_dirs.sort();
    let mut runs = Vec::with_capacity(run_dirs.len());
    for run_dir in &run_dirs {
        let path = run_dir.join("metrics.csv");
        let text = fs::read_to_string(&path)
            .map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
        let rows = tables::parse_metrics_csv(&text)
            .map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
        runs.push(rows);
    }
    if runs.is_empty() {
        return Err(CliError::new(
            EXIT_VALIDATION,
            format!(
                "no run directories with metrics.csv under {}",
                dir.display()
            ),
        ));
    }
    write_file(
        &dir.join("report.csv"),
        &tables::aggregate_metrics_csv(&runs),
    )?;
    Ok(())
}
