//! Derivative-free stochastic optimization with online statistical inference.
//!
//! The library couples a family of simultaneous-perturbation optimizers with
//! streaming estimators for the optimal performance and its variance, so a
//! single run produces both a minimizer estimate and a confidence interval
//! for the optimum. A Monte Carlo harness replicates runs over a suite of
//! synthetic black-box problems and aggregates coverage, RMSE, and
//! normalized-estimator statistics.
//!
//! Modules follow the pipeline:
//!
//! * [`model`] — schedules, configuration, iterate state, run results
//! * [`rng`] — seedable random streams, sphere directions, noise variates
//! * [`problems`] — synthetic mean functions with known optima and noise laws
//! * [`optimizers`] — the six algorithm engines sharing one stepping contract
//! * [`inference`] — confidence intervals, normalized estimators, OU diagnostic
//! * [`harness`] — replication driver and metric aggregation

// Validation deliberately writes `!(x > 0.0)` rather than `x <= 0.0`: the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod harness;
pub mod inference;
pub mod model;
pub mod optimizers;
pub mod problems;
pub mod rng;

pub use harness::{run_experiment, run_experiment_with_threads, ExperimentPlan, MetricsTable};
pub use inference::ConfidenceInterval;
pub use model::{
    min_sample_size, AlgorithmId, FeasibleRegion, IterateState, RunConfig, RunResult,
    StepSchedule, WeightMode,
};
pub use optimizers::AlgorithmSpec;
pub use problems::{MeanFunction, Problem};
pub use rng::{split_stream, NoiseCase, RngStream};
