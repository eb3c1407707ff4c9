//! Experiment runner: resolves a configuration into one or more plans, runs
//! the Monte Carlo harness, and emits CSV tables plus optional SVG plots.

use bbo_infer_cli::config::{parse_config, Overrides};
use bbo_infer_cli::{execute_plan, CliError};
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "bbo-infer",
    about = "Derivative-free optimization with online inference: Monte Carlo benchmark runner",
    after_help = "Worker count is capped by the BBO_INFER_THREADS environment variable."
)]
struct Args {
    /// Key=value configuration file; optional [section] blocks define one
    /// experiment each
    #[arg(long)]
    config: Option<PathBuf>,

    /// Directory for CSV/plot outputs (per-section subdirectories when the
    /// config defines sections beyond "main")
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,

    /// Base seed for the replication streams
    #[arg(long)]
    seed: Option<u64>,

    /// Number of Monte Carlo replications per (problem, algorithm)
    #[arg(long)]
    replications: Option<usize>,

    /// Iterations per run
    #[arg(long)]
    n: Option<usize>,

    /// Constant step size of the performance estimator
    #[arg(long)]
    gamma: Option<f64>,

    /// Batch size per perturbation point
    #[arg(long)]
    tau: Option<usize>,

    /// Comma list of algorithms (spsa-si,ordinary,forward,four-point,mts,mts-four-point)
    #[arg(long)]
    algorithms: Option<String>,

    /// Comma list of problem ids, e.g. quad1d-sharp:normal,quad2d:gamma
    #[arg(long)]
    problems: Option<String>,

    /// Comma list of confidence levels alpha in (0, 1)
    #[arg(long)]
    alpha: Option<String>,

    /// Also write SVG plots
    #[arg(long)]
    emit_plots: bool,
}

fn run(args: Args) -> Result<(), CliError> {
    let contents = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => String::new(),
    };
    let overrides = Overrides {
        seed: args.seed,
        replications: args.replications,
        n: args.n,
        gamma: args.gamma,
        tau: args.tau,
        algorithms: args.algorithms.clone(),
        problems: args.problems.clone(),
        alpha: args.alpha.clone(),
        emit_plots: args.emit_plots,
    };
    let plans = parse_config(&contents, &overrides)?;
    let multi = plans.len() > 1;
    for plan in &plans {
        let dir = if multi {
            args.output_dir.join(&plan.name)
        } else {
            args.output_dir.clone()
        };
        let paths = execute_plan(plan, &dir)?;
        println!(
            "experiment \"{}\": {} problems x {} algorithms x {} replications -> {} files in {}",
            plan.name,
            plan.plan.problems.len(),
            plan.plan.algorithms.len(),
            plan.plan.replications,
            paths.len(),
            dir.display()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
