//! Shared data model: step-size schedules, feasible regions, run
//! configuration, iterate state, and result records.
//!
//! Everything here is immutable after construction and safe to share between
//! concurrent workers.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("schedule scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("schedule exponent must lie in [0, 1], got {0}")]
    ExponentOutOfRange(f64),
    #[error("constant schedule value must lie in (0, 1), got {0}")]
    ConstantOutOfRange(f64),
    #[error("gamma must lie in (0, 1), got {0}")]
    GammaOutOfRange(f64),
    #[error("c must exceed 1, got {0}")]
    SampleSizeFactorOutOfRange(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("region bounds malformed: {0}")]
    BadRegion(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("theta0 lies outside the feasible region")]
    Theta0Outside,
    #[error("v0 must be non-negative, got {0}")]
    NegativeV0(f64),
    #[error("batch size must be at least 1")]
    ZeroBatch,
    #[error("n_iterations = {n} is below the minimum sample size {min} for gamma = {gamma}")]
    TooFewIterations { n: usize, min: usize, gamma: f64 },
}

/// Step-size or perturbation-size schedule evaluated at iteration index `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `scale * (k + 1)^(-exponent)`.
    PowerDecay { scale: f64, exponent: f64 },
    /// A fixed value in (0, 1), independent of `k`.
    Constant { value: f64 },
}

impl StepSchedule {
    pub fn power_decay(scale: f64, exponent: f64) -> Result<Self, ModelError> {
        if !(scale > 0.0) {
            return Err(ModelError::NonPositiveScale(scale));
        }
        if !(0.0..=1.0).contains(&exponent) {
            return Err(ModelError::ExponentOutOfRange(exponent));
        }
        Ok(Self::PowerDecay { scale, exponent })
    }

    pub fn constant(value: f64) -> Result<Self, ModelError> {
        if !(value > 0.0 && value < 1.0) {
            return Err(ModelError::ConstantOutOfRange(value));
        }
        Ok(Self::Constant { value })
    }

    /// Evaluates the schedule at iteration `k >= 0`. Total function.
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            Self::PowerDecay { scale, exponent } => scale * ((k + 1) as f64).powf(-exponent),
            Self::Constant { value } => value,
        }
    }
}

/// Minimum sample size `floor(-(c / 2 gamma) ln gamma) + 1` required before
/// the constant-step performance estimator forgets its initialization.
pub fn min_sample_size(gamma: f64, c: f64) -> Result<usize, ModelError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(ModelError::GammaOutOfRange(gamma));
    }
    if !(c > 1.0) {
        return Err(ModelError::SampleSizeFactorOutOfRange(c));
    }
    Ok((-(c / (2.0 * gamma)) * gamma.ln()).floor() as usize + 1)
}

/// Bare lower bound `floor(-(1 / 2 gamma) ln gamma) + 1`, the c -> 1 limit of
/// [`min_sample_size`]. Used for configuration validation.
pub(crate) fn min_sample_size_bare(gamma: f64) -> usize {
    (-(0.5 / gamma) * gamma.ln()).floor() as usize + 1
}

/// Convex, compact feasible region with a closed-form Euclidean projection.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleRegion {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl FeasibleRegion {
    pub fn bounded_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ModelError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(ModelError::BadRegion(format!(
                "box needs matching non-empty bounds, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo < hi) {
                return Err(ModelError::BadRegion(format!(
                    "box bound {i}: lower {lo} must be below upper {hi}"
                )));
            }
        }
        Ok(Self::Box { lower, upper })
    }

    /// Symmetric box `[-half_width, half_width]^dim`.
    pub fn symmetric_box(dim: usize, half_width: f64) -> Result<Self, ModelError> {
        Self::bounded_box(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self, ModelError> {
        if center.is_empty() {
            return Err(ModelError::BadRegion("ball needs a non-empty center".into()));
        }
        if !(radius > 0.0) {
            return Err(ModelError::BadRegion(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lower, .. } => lower.len(),
            Self::Ball { center, .. } => center.len(),
        }
    }

    /// Membership test. Balls allow a relative slack of a few ulps so that
    /// projected points always test as members.
    pub fn contains(&self, point: &[f64]) -> bool {
        match self {
            Self::Box { lower, upper } => {
                point.len() == lower.len()
                    && point
                        .iter()
                        .zip(lower.iter().zip(upper))
                        .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
            }
            Self::Ball { center, radius } => {
                point.len() == center.len() && {
                    let dist2: f64 = point
                        .iter()
                        .zip(center)
                        .map(|(x, c)| (x - c) * (x - c))
                        .sum();
                    dist2.sqrt() <= radius * (1.0 + 1e-12)
                }
            }
        }
    }

    /// Euclidean projection onto the region: per-coordinate clamp for boxes,
    /// radial rescale for balls. Identity on interior points.
    pub fn project(&self, point: &[f64]) -> Vec<f64> {
        match self {
            Self::Box { lower, upper } => point
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(x, (lo, hi))| x.clamp(*lo, *hi))
                .collect(),
            Self::Ball { center, radius } => {
                let dist2: f64 = point
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum();
                let dist = dist2.sqrt();
                if dist <= *radius {
                    point.to_vec()
                } else {
                    let scale = radius / dist;
                    point
                        .iter()
                        .zip(center)
                        .map(|(x, c)| c + (x - c) * scale)
                        .collect()
                }
            }
        }
    }
}

/// The `r_k` weight sequence inside the variance update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// `r_k = 1` for all k.
    #[default]
    Unit,
    /// `r_k = k / (k + 1)`, down-weighting the earliest residuals.
    KOverKPlusOne,
}

impl WeightMode {
    pub fn weight(&self, k: usize) -> f64 {
        match self {
            Self::Unit => 1.0,
            Self::KOverKPlusOne => k as f64 / (k + 1) as f64,
        }
    }
}

/// Identifies one of the six algorithm engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmId {
    SpsaSi,
    Ordinary,
    Forward,
    FourPoint,
    Mts,
    MtsFourPoint,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 6] = [
        AlgorithmId::SpsaSi,
        AlgorithmId::Ordinary,
        AlgorithmId::Forward,
        AlgorithmId::FourPoint,
        AlgorithmId::Mts,
        AlgorithmId::MtsFourPoint,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::SpsaSi => "spsa-si",
            Self::Ordinary => "ordinary",
            Self::Forward => "forward",
            Self::FourPoint => "four-point",
            Self::Mts => "mts",
            Self::MtsFourPoint => "mts-four-point",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|a| a.as_str() == s)
    }
}

impl std::fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full per-run configuration: dimensions, schedules, initial state, region.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n_iterations: usize,
    pub batch_size: usize,
    pub a_schedule: StepSchedule,
    pub c_schedule: StepSchedule,
    pub gamma: f64,
    pub alpha: f64,
    pub theta0: Vec<f64>,
    pub mu0: f64,
    pub v0: f64,
    pub region: FeasibleRegion,
    pub weight_mode: WeightMode,
    pub seed: u64,
}

impl RunConfig {
    /// Validates cross-field invariants. `require_ci_sample_size` additionally
    /// enforces `n >= floor(-(1/2 gamma) ln gamma) + 1`, the bare bound needed
    /// before the confidence interval is meaningful.
    pub fn validate(&self, require_ci_sample_size: bool) -> Result<(), ModelError> {
        if self.batch_size == 0 {
            return Err(ModelError::ZeroBatch);
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(ModelError::GammaOutOfRange(self.gamma));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ModelError::AlphaOutOfRange(self.alpha));
        }
        if self.region.dim() != self.dim {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim,
                got: self.region.dim(),
            });
        }
        if self.theta0.len() != self.dim {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim,
                got: self.theta0.len(),
            });
        }
        if !self.region.contains(&self.theta0) {
            return Err(ModelError::Theta0Outside);
        }
        if !(self.v0 >= 0.0) {
            return Err(ModelError::NegativeV0(self.v0));
        }
        if require_ci_sample_size {
            let min = min_sample_size_bare(self.gamma);
            if self.n_iterations < min {
                return Err(ModelError::TooFewIterations {
                    n: self.n_iterations,
                    min,
                    gamma: self.gamma,
                });
            }
        }
        Ok(())
    }
}

/// Evolving per-run state: iteration counter, parameter vector, performance
/// estimate, and variance estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub k: usize,
    pub theta: Vec<f64>,
    pub mu: f64,
    pub v: f64,
}

impl IterateState {
    pub fn initial(config: &RunConfig) -> Self {
        Self {
            k: 0,
            theta: config.theta0.clone(),
            mu: config.mu0,
            v: config.v0,
        }
    }
}

/// Trajectory snapshot taken after `k` completed iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub k: usize,
    pub theta: Vec<f64>,
    pub mu: f64,
    pub v: f64,
}

/// Terminal state plus checkpointed snapshots for one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: AlgorithmId,
    pub final_state: IterateState,
    pub checkpoints: Vec<Checkpoint>,
}
