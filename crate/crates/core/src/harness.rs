//! Monte Carlo replication driver and metric aggregation.
//!
//! Replications are the unit of parallelism. Each one owns a random stream
//! keyed by `(seed, problem, algorithm, replication)`, so results are
//! bit-identical regardless of worker count, and aggregation reduces the
//! per-replication records in replication order with pairwise summation.

use crate::inference::{normalized_estimate, z_quantile, InferenceError};
use crate::model::{ModelError, RunConfig, RunResult, StepSchedule, WeightMode};
use crate::optimizers::{run, AlgorithmSpec, OptimizerError};
use crate::problems::Problem;
use crate::rng::RngStream;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment plan: {0}")]
    BadPlan(String),
    #[error("all {0} replications failed")]
    AllReplicationsFailed(usize),
    #[error("no replication records to aggregate")]
    EmptyResults,
    #[error("histogram needs at least one bin")]
    ZeroBins,
    #[error("histogram range is empty: [{0}, {1})")]
    EmptyRange(f64, f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Initial parameter vector, either broadcast from a scalar or given fully.
#[derive(Debug, Clone, PartialEq)]
pub enum Theta0Init {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Theta0Init {
    fn materialize(&self, dim: usize) -> Result<Vec<f64>, HarnessError> {
        match self {
            Self::Scalar(v) => Ok(vec![*v; dim]),
            Self::Vector(v) => {
                if v.len() != dim {
                    return Err(HarnessError::BadPlan(format!(
                        "theta0 has {} entries but the problem has dimension {dim}",
                        v.len()
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Run settings shared by every (problem, algorithm) cell of an experiment.
/// Per-problem fields of [`RunConfig`] (dimension, region, initial vector)
/// are materialized from the problem itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub n_iterations: usize,
    pub batch_size: usize,
    pub a_schedule: StepSchedule,
    pub c_schedule: StepSchedule,
    pub gamma: f64,
    pub theta0: Theta0Init,
    pub mu0: f64,
    pub v0: f64,
    pub weight_mode: WeightMode,
    pub seed: u64,
}

impl RunSettings {
    pub fn config_for(
        &self,
        problem: &Problem,
        alpha: f64,
    ) -> Result<RunConfig, HarnessError> {
        let dim = problem.dim();
        let config = RunConfig {
            dim,
            n_iterations: self.n_iterations,
            batch_size: self.batch_size,
            a_schedule: self.a_schedule,
            c_schedule: self.c_schedule,
            gamma: self.gamma,
            alpha,
            theta0: self.theta0.materialize(dim)?,
            mu0: self.mu0,
            v0: self.v0,
            region: problem.region.clone(),
            weight_mode: self.weight_mode,
            seed: self.seed,
        };
        config.validate(false)?;
        Ok(config)
    }
}

/// Everything needed to reproduce one experiment end to end.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub problems: Vec<Problem>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub replications: usize,
    pub settings: RunSettings,
    /// Strictly increasing snapshot indices; the last must equal `n`.
    pub checkpoints: Vec<usize>,
    pub alpha_levels: Vec<f64>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.problems.is_empty() {
            return Err(HarnessError::BadPlan("no problems listed".into()));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::BadPlan("no algorithms listed".into()));
        }
        if self.replications == 0 {
            return Err(HarnessError::BadPlan("replications must be at least 1".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(HarnessError::BadPlan("checkpoint schedule is empty".into()));
        }
        if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(HarnessError::BadPlan(
                "checkpoints must be strictly increasing".into(),
            ));
        }
        if *self.checkpoints.last().unwrap() != self.settings.n_iterations {
            return Err(HarnessError::BadPlan(format!(
                "last checkpoint {} must equal n = {}",
                self.checkpoints.last().unwrap(),
                self.settings.n_iterations
            )));
        }
        if self.alpha_levels.is_empty()
            || !self.alpha_levels.iter().all(|a| *a > 0.0 && *a < 1.0)
        {
            return Err(HarnessError::BadPlan(
                "alpha levels must be a non-empty list inside (0, 1)".into(),
            ));
        }
        let alpha = self.alpha_levels[0];
        for problem in &self.problems {
            let config = self.settings.config_for(problem, alpha)?;
            for algorithm in &self.algorithms {
                algorithm
                    .validate(&config)
                    .map_err(|e| HarnessError::BadPlan(e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// Default snapshot schedule: `count` log-spaced indices from 10 to `n`,
/// deduplicated, always ending at `n`.
pub fn default_checkpoints(n: usize, count: usize) -> Vec<usize> {
    if n == 0 {
        return vec![0];
    }
    let lo = 10.0_f64.min(n as f64);
    let hi = n as f64;
    let count = count.max(1);
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let t = if count == 1 {
            1.0
        } else {
            i as f64 / (count - 1) as f64
        };
        let value = 10f64.powf(lo.log10() + t * (hi.log10() - lo.log10()));
        points.push((value.round() as usize).clamp(1, n));
    }
    points.sort_unstable();
    points.dedup();
    if *points.last().unwrap() != n {
        points.push(n);
    }
    points
}

/// A replication that aborted, with the diagnostic it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationFailure {
    pub replication: usize,
    pub message: String,
}

/// Raw per-(problem, algorithm) replication records, in replication order.
#[derive(Debug, Clone)]
pub struct CellResults {
    pub problem: Problem,
    pub algorithm: AlgorithmSpec,
    pub gamma: f64,
    pub n_iterations: usize,
    pub checkpoints: Vec<usize>,
    pub replications: usize,
    pub records: Vec<RunResult>,
    pub failures: Vec<ReplicationFailure>,
}

/// Aggregated metrics for one (problem, algorithm) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub problem_id: String,
    pub case_id: String,
    pub algorithm_id: String,
    pub checkpoints: Vec<usize>,
    /// Per checkpoint `(k, mean, std)` of the parameter error norm; absent
    /// for problems without a certified optimum location.
    pub rmse: Option<Vec<(usize, f64, f64)>>,
    /// Terminal optimality gap `(mean, std)`; absent alongside `rmse`.
    pub gap: Option<(f64, f64)>,
    /// Per alpha level, per checkpoint coverage fractions.
    pub coverage: Vec<Vec<(usize, f64)>>,
    /// Terminal normalized-estimator sample mean and standard deviation.
    pub tstats: Option<(f64, f64)>,
    /// Terminal normalized estimates the histogram was built from.
    pub histogram: Histogram,
    pub replications: usize,
    pub successes: usize,
    pub failures: usize,
}

/// Equal-width histogram with open-ended first and last bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bin_edges(&self, index: usize) -> (f64, f64) {
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        (
            self.lo + index as f64 * width,
            self.lo + (index + 1) as f64 * width,
        )
    }
}

/// Cross-replication aggregates for a whole experiment, cells sorted by
/// (problem, case, algorithm).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub cells: Vec<CellMetrics>,
    pub alpha_levels: Vec<f64>,
    pub replications: usize,
}

/// Pairwise (tree) summation: deterministic and more accurate than a naive
/// left fold for long inputs.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Sample mean and standard deviation (denominator `n - 1`; zero spread for
/// fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let squared: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&squared) / (n - 1.0);
    (mean, var.sqrt())
}

/// Fraction of normalized estimates inside `[-z, z]`.
pub fn coverage_fraction(normalized: &[f64], z: f64) -> f64 {
    if normalized.is_empty() {
        return 0.0;
    }
    let hits = normalized.iter().filter(|t| t.abs() <= z).count();
    hits as f64 / normalized.len() as f64
}

/// Equal-width histogram over `range`; out-of-range values land in the open
/// end bins.
pub fn histogram(
    values: &[f64],
    bin_count: usize,
    range: (f64, f64),
) -> Result<Histogram, HarnessError> {
    if bin_count == 0 {
        return Err(HarnessError::ZeroBins);
    }
    let (lo, hi) = range;
    if !(lo < hi) {
        return Err(HarnessError::EmptyRange(lo, hi));
    }
    let mut counts = vec![0u64; bin_count];
    let width = (hi - lo) / bin_count as f64;
    for &v in values {
        let idx = if v < lo {
            0
        } else {
            (((v - lo) / width) as usize).min(bin_count - 1)
        };
        counts[idx] += 1;
    }
    Ok(Histogram { lo, hi, counts })
}

/// Per-checkpoint mean and standard deviation of the parameter error norm
/// across replications; `None` when the optimum location is not certified.
pub fn rmse_curve(cell: &CellResults) -> Option<Vec<(usize, f64, f64)>> {
    let theta_star = cell.problem.theta_star.as_ref()?;
    let mut curve = Vec::with_capacity(cell.checkpoints.len());
    for (idx, &k) in cell.checkpoints.iter().enumerate() {
        let errors: Vec<f64> = cell
            .records
            .iter()
            .map(|r| {
                let snap = &r.checkpoints[idx];
                debug_assert_eq!(snap.k, k);
                snap.theta
                    .iter()
                    .zip(theta_star)
                    .map(|(t, s)| (t - s) * (t - s))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let (mean, std) = mean_std(&errors);
        curve.push((k, mean, std));
    }
    Some(curve)
}

/// Normalized estimate of one snapshot, reusing the per-algorithm forms at
/// the checkpoint index. Undefined (degenerate variance or index zero)
/// snapshots cover only if the estimate equals the target exactly.
fn snapshot_covers(
    cell: &CellResults,
    mu: f64,
    v: f64,
    k: usize,
    z: f64,
) -> bool {
    match normalized_estimate(&cell.algorithm, mu, v, k, cell.gamma, cell.problem.mu_star) {
        Ok(est) => est.value.abs() <= z,
        Err(_) => mu == cell.problem.mu_star,
    }
}

/// Per-checkpoint fraction of replications whose interval covers the true
/// optimal performance, in the algorithm's normalized form.
pub fn coverage_curve(
    cell: &CellResults,
    alpha: f64,
) -> Result<Vec<(usize, f64)>, HarnessError> {
    if cell.records.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let z = z_quantile(alpha)?;
    let mut curve = Vec::with_capacity(cell.checkpoints.len());
    for (idx, &k) in cell.checkpoints.iter().enumerate() {
        let covered = cell
            .records
            .iter()
            .filter(|r| {
                let snap = &r.checkpoints[idx];
                snapshot_covers(cell, snap.mu, snap.v, k, z)
            })
            .count();
        curve.push((k, covered as f64 / cell.records.len() as f64));
    }
    Ok(curve)
}

/// Terminal normalized estimates for every replication whose variance
/// estimate admits one.
pub fn terminal_normalized(cell: &CellResults) -> Vec<f64> {
    cell.records
        .iter()
        .filter_map(|r| {
            normalized_estimate(
                &cell.algorithm,
                r.final_state.mu,
                r.final_state.v,
                cell.n_iterations,
                cell.gamma,
                cell.problem.mu_star,
            )
            .ok()
            .map(|e| e.value)
        })
        .collect()
}

/// Sample mean and standard deviation (denominator `R - 1`) of the terminal
/// normalized estimates.
pub fn tstat_summary(cell: &CellResults) -> Result<(f64, f64), HarnessError> {
    let values = terminal_normalized(cell);
    if values.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    Ok(mean_std(&values))
}

/// Histogram bounds used for normalized-estimator figures.
pub const HISTOGRAM_RANGE: (f64, f64) = (-4.0, 4.0);
pub const HISTOGRAM_BINS: usize = 40;

/// Aggregates one cell of replication records into its metrics block.
pub fn summarize_cell(
    cell: &CellResults,
    alpha_levels: &[f64],
) -> Result<CellMetrics, HarnessError> {
    let successes = cell.records.len();
    let rmse = rmse_curve(cell);
    let gap = cell.problem.theta_star.as_ref().map(|_| {
        let gaps: Vec<f64> = cell
            .records
            .iter()
            .map(|r| {
                (cell.problem.mean.value(&r.final_state.theta) - cell.problem.mu_star).abs()
            })
            .collect();
        mean_std(&gaps)
    });
    let mut coverage = Vec::with_capacity(alpha_levels.len());
    for &alpha in alpha_levels {
        if successes == 0 {
            coverage.push(Vec::new());
        } else {
            coverage.push(coverage_curve(cell, alpha)?);
        }
    }
    let normalized = terminal_normalized(cell);
    let tstats = if normalized.is_empty() {
        None
    } else {
        Some(mean_std(&normalized))
    };
    let hist = histogram(&normalized, HISTOGRAM_BINS, HISTOGRAM_RANGE)?;
    Ok(CellMetrics {
        problem_id: cell.problem.mean.as_str().to_string(),
        case_id: cell.problem.case.as_str().to_string(),
        algorithm_id: cell.algorithm.id.as_str().to_string(),
        checkpoints: cell.checkpoints.clone(),
        rmse,
        gap,
        coverage,
        tstats,
        histogram: hist,
        replications: cell.replications,
        successes,
        failures: cell.failures.len(),
    })
}

/// Stream id for one replication: the packing keeps streams disjoint across
/// problems, algorithms, and replications, so no two runs share variates.
fn stream_id(problem_idx: usize, algorithm_idx: usize, replication: usize) -> u64 {
    debug_assert!(problem_idx < (1 << 16));
    debug_assert!(algorithm_idx < (1 << 8));
    debug_assert!(replication < (1 << 40));
    ((problem_idx as u64) << 48) | ((algorithm_idx as u64) << 40) | replication as u64
}

/// Runs every replication of one (problem, algorithm) cell.
pub fn collect_cell(
    plan: &ExperimentPlan,
    problem_idx: usize,
    algorithm_idx: usize,
) -> Result<CellResults, HarnessError> {
    let problem = &plan.problems[problem_idx];
    let algorithm = plan.algorithms[algorithm_idx];
    let config = plan
        .settings
        .config_for(problem, plan.alpha_levels[0])?;

    let outcomes: Vec<Result<RunResult, ReplicationFailure>> = (0..plan.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(
                plan.settings.seed,
                stream_id(problem_idx, algorithm_idx, rep),
            );
            run(&algorithm, &config, problem, &mut rng, &plan.checkpoints).map_err(
                |e: OptimizerError| ReplicationFailure {
                    replication: rep,
                    message: e.to_string(),
                },
            )
        })
        .collect();

    let mut records = Vec::with_capacity(plan.replications);
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    Ok(CellResults {
        problem: problem.clone(),
        algorithm,
        gamma: plan.settings.gamma,
        n_iterations: plan.settings.n_iterations,
        checkpoints: plan.checkpoints.clone(),
        replications: plan.replications,
        records,
        failures,
    })
}

fn run_inner(plan: &ExperimentPlan) -> Result<MetricsTable, HarnessError> {
    plan.validate()?;
    let mut cells = Vec::with_capacity(plan.problems.len() * plan.algorithms.len());
    let mut total_successes = 0usize;
    for problem_idx in 0..plan.problems.len() {
        for algorithm_idx in 0..plan.algorithms.len() {
            let cell = collect_cell(plan, problem_idx, algorithm_idx)?;
            total_successes += cell.records.len();
            cells.push(summarize_cell(&cell, &plan.alpha_levels)?);
        }
    }
    if total_successes == 0 {
        return Err(HarnessError::AllReplicationsFailed(
            plan.replications * plan.problems.len() * plan.algorithms.len(),
        ));
    }
    cells.sort_by(|a, b| {
        (&a.problem_id, &a.case_id, &a.algorithm_id)
            .cmp(&(&b.problem_id, &b.case_id, &b.algorithm_id))
    });
    Ok(MetricsTable {
        cells,
        alpha_levels: plan.alpha_levels.clone(),
        replications: plan.replications,
    })
}

/// Runs the experiment on the global worker pool.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<MetricsTable, HarnessError> {
    run_inner(plan)
}

/// Runs the experiment on a dedicated pool of `threads` workers. Results are
/// bit-identical for any worker count.
pub fn run_experiment_with_threads(
    plan: &ExperimentPlan,
    threads: usize,
) -> Result<MetricsTable, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    pool.install(|| run_inner(plan))
}
