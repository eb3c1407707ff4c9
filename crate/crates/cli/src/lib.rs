//! Configuration parsing, experiment orchestration, and emission of CSV
//! tables and SVG plots for the `bbo-infer` library.

pub mod config;
pub mod plots;
pub mod tables;

use bbo_infer::harness::{self, HarnessError, MetricsTable};
use config::NamedPlan;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Process exit codes: 0 success, 2 configuration error, 3 every
/// replication failed, 4 I/O error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] config::ConfigError),
    #[error("configuration error: {0}")]
    Plan(String),
    #[error("{0}")]
    AllFailed(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Plan(_) => 2,
            CliError::AllFailed(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Number of harness workers: the `BBO_INFER_THREADS` environment variable
/// when set, otherwise one per available core.
pub fn worker_threads() -> Option<usize> {
    std::env::var("BBO_INFER_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
}

/// Runs one resolved plan and writes its outputs under `output_dir`.
/// Returns the emitted file paths.
pub fn execute_plan(plan: &NamedPlan, output_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let metrics = run_plan(&plan.plan)?;
    write_outputs(plan, &metrics, output_dir)
}

/// Runs the experiment, honoring the worker-count environment cap.
pub fn run_plan(plan: &bbo_infer::ExperimentPlan) -> Result<MetricsTable, CliError> {
    let result = match worker_threads() {
        Some(threads) => harness::run_experiment_with_threads(plan, threads),
        None => harness::run_experiment(plan),
    };
    result.map_err(|e| match e {
        HarnessError::AllReplicationsFailed(_) => CliError::AllFailed(e.to_string()),
        other => CliError::Plan(other.to_string()),
    })
}

/// Writes the resolved-config echo, CSV tables, and (optionally) plots.
pub fn write_outputs(
    plan: &NamedPlan,
    metrics: &MetricsTable,
    output_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(output_dir).map_err(io_err(output_dir))?;
    let mut paths = Vec::new();

    let resolved_path = output_dir.join("resolved.cfg");
    std::fs::write(&resolved_path, config::render_resolved(plan))
        .map_err(io_err(&resolved_path))?;
    paths.push(resolved_path);

    paths.extend(
        tables::write_tables(metrics, output_dir).map_err(io_err(output_dir))?,
    );
    if plan.emit_plots {
        let plot_paths = plots::write_plots(metrics, output_dir).map_err(io_err(output_dir))?;
        if plot_paths.is_empty() {
            eprintln!("warning: no plottable metrics; skipped plot emission");
        }
        paths.extend(plot_paths);
    }
    Ok(paths)
}
