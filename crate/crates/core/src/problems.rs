//! The synthetic black-box suite: mean functions with closed-form gradients
//! and (where certified) known optima, composed with a noise case into a
//! sampleable oracle.
//!
//! Oracles are deliberately defined beyond the feasible region: perturbed
//! query points `theta +- c u` may step outside it, and the mean and noise
//! scale are evaluated there without projection. Domain violations of the
//! noise law itself (a Bernoulli mean outside [0, 1], a non-positive Gamma
//! mean) surface as errors.

use crate::model::FeasibleRegion;
use crate::rng::{sample_output, NoiseCase, RandomnessError, RngStream};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("dimension mismatch: function expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("region dimension {region} does not match function dimension {function}")]
    RegionMismatch { region: usize, function: usize },
    #[error("stationary point lies outside the feasible region")]
    StationaryPointOutside,
    #[error("{0} has no certified optimum; supply a reference value")]
    UncertifiedOptimum(&'static str),
    #[error("bernoulli case needs a mean function with range inside [0, 1]; {0} does not qualify")]
    BernoulliIncompatible(&'static str),
    #[error(transparent)]
    Randomness(#[from] RandomnessError),
}

/// Whether a mean function is optimized downward or upward. The optimizer
/// engines negate the gradient step for maximization; nothing else changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimDirection {
    Minimize,
    Maximize,
}

/// Link applied on top of the raw Perm(0,10,10) value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perm10Link {
    /// `mu = 1 / (1 + exp(-a f - c))`, keeping the mean inside (0, 1).
    Bernoulli { a: f64, c: f64 },
    /// `mu = a f + c`.
    Affine { a: f64, c: f64 },
}

/// The test functions. Coefficients are fixed except where noted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanFunction {
    /// `-0.02125 t^2 + 0.01825 t + 0.0105` on [0, 1]; concave, maximized.
    Quad1dWu,
    /// `t^2 - 2 t + 1.5` on [-2, 2]; minimized at (1, 0.5).
    Quad1dSharp,
    /// `0.5 t' A t - b' t + 1` with symmetric positive definite `A`.
    Quad2d { a: [[f64; 2]; 2], b: [f64; 2] },
    /// Perm(0,10,10) composed with a link; no certified optimum.
    Perm10 { link: Perm10Link },
}

impl MeanFunction {
    /// The 2-d quadratic with the reference coefficients.
    pub fn quad2d_default() -> Self {
        Self::Quad2d {
            a: [[1.04, -0.2], [-0.2, 1.0]],
            b: [-1.0, 0.5],
        }
    }

    pub fn perm10_bernoulli() -> Self {
        Self::Perm10 {
            link: Perm10Link::Bernoulli { a: 2e-11, c: -1.0 },
        }
    }

    pub fn perm10_affine() -> Self {
        Self::Perm10 {
            link: Perm10Link::Affine { a: 1e-10, c: 0.0 },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Quad1dWu | Self::Quad1dSharp => 1,
            Self::Quad2d { .. } => 2,
            Self::Perm10 { .. } => 10,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Quad1dWu => "quad1d-wu",
            Self::Quad1dSharp => "quad1d-sharp",
            Self::Quad2d { .. } => "quad2d",
            Self::Perm10 { .. } => "perm10",
        }
    }

    pub fn direction(&self) -> OptimDirection {
        match self {
            Self::Quad1dWu => OptimDirection::Maximize,
            _ => OptimDirection::Minimize,
        }
    }

    /// The feasible region each function is studied on.
    pub fn default_region(&self) -> FeasibleRegion {
        match self {
            Self::Quad1dWu => FeasibleRegion::bounded_box(vec![0.0], vec![1.0]).unwrap(),
            Self::Quad1dSharp => FeasibleRegion::symmetric_box(1, 2.0).unwrap(),
            Self::Quad2d { .. } => FeasibleRegion::symmetric_box(2, 2.0).unwrap(),
            Self::Perm10 { .. } => FeasibleRegion::symmetric_box(10, 2.0).unwrap(),
        }
    }

    /// Closed-form mean value.
    pub fn value(&self, theta: &[f64]) -> f64 {
        match self {
            Self::Quad1dWu => {
                let t = theta[0];
                -0.02125 * t * t + 0.01825 * t + 0.0105
            }
            Self::Quad1dSharp => {
                let t = theta[0];
                t * t - 2.0 * t + 1.5
            }
            Self::Quad2d { a, b } => {
                let (x, y) = (theta[0], theta[1]);
                0.5 * (a[0][0] * x * x + 2.0 * a[0][1] * x * y + a[1][1] * y * y)
                    - (b[0] * x + b[1] * y)
                    + 1.0
            }
            Self::Perm10 { link } => {
                let f = perm10_raw(theta);
                match *link {
                    Perm10Link::Bernoulli { a, c } => 1.0 / (1.0 + (-a * f - c).exp()),
                    Perm10Link::Affine { a, c } => a * f + c,
                }
            }
        }
    }

    /// Closed-form gradient of the mean.
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        match self {
            Self::Quad1dWu => vec![-0.0425 * theta[0] + 0.01825],
            Self::Quad1dSharp => vec![2.0 * theta[0] - 2.0],
            Self::Quad2d { a, b } => {
                let (x, y) = (theta[0], theta[1]);
                vec![
                    a[0][0] * x + a[0][1] * y - b[0],
                    a[1][0] * x + a[1][1] * y - b[1],
                ]
            }
            Self::Perm10 { link } => {
                let grad_f = perm10_raw_gradient(theta);
                let chain = match *link {
                    Perm10Link::Bernoulli { a, c } => {
                        let s = 1.0 / (1.0 + (-a * perm10_raw(theta) - c).exp());
                        a * s * (1.0 - s)
                    }
                    Perm10Link::Affine { a, .. } => a,
                };
                grad_f.into_iter().map(|g| chain * g).collect()
            }
        }
    }

    /// The interior stationary point and its value, for functions whose
    /// optimum is certified in closed form.
    fn certified_stationary_point(&self) -> Option<(Vec<f64>, f64)> {
        match self {
            Self::Quad1dWu => {
                // vertex of the concave parabola: t = -b / (2 a)
                let t = 0.01825 / (2.0 * 0.02125);
                Some((vec![t], self.value(&[t])))
            }
            Self::Quad1dSharp => Some((vec![1.0], self.value(&[1.0]))),
            Self::Quad2d { a, b } => {
                // solve A t = b for the 2x2 system
                let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                let x = (b[0] * a[1][1] - b[1] * a[0][1]) / det;
                let y = (a[0][0] * b[1] - a[1][0] * b[0]) / det;
                Some((vec![x, y], self.value(&[x, y])))
            }
            Self::Perm10 { .. } => None,
        }
    }

    fn bernoulli_compatible(&self) -> bool {
        match self {
            // range on [0, 1] is [0.0105, 0.0144...]
            Self::Quad1dWu => true,
            Self::Perm10 {
                link: Perm10Link::Bernoulli { .. },
            } => true,
            _ => false,
        }
    }
}

fn perm10_raw(theta: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 1..=10u32 {
        let mut inner = 0.0;
        for (idx, t) in theta.iter().enumerate() {
            let j = (idx + 1) as f64;
            inner += (j + 10.0) * (t.powi(i as i32) - j.powi(-(i as i32)));
        }
        total += inner * inner;
    }
    total
}

fn perm10_raw_gradient(theta: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; theta.len()];
    for i in 1..=10u32 {
        let mut inner = 0.0;
        for (idx, t) in theta.iter().enumerate() {
            let j = (idx + 1) as f64;
            inner += (j + 10.0) * (t.powi(i as i32) - j.powi(-(i as i32)));
        }
        for (idx, t) in theta.iter().enumerate() {
            let j = (idx + 1) as f64;
            grad[idx] += 2.0 * inner * (j + 10.0) * i as f64 * t.powi(i as i32 - 1);
        }
    }
    grad
}

/// Location and value of the certified optimum inside the region.
pub fn true_optimum(
    mean: &MeanFunction,
    region: &FeasibleRegion,
) -> Result<(Vec<f64>, f64), ProblemError> {
    if region.dim() != mean.dim() {
        return Err(ProblemError::RegionMismatch {
            region: region.dim(),
            function: mean.dim(),
        });
    }
    let (theta_star, value) = mean
        .certified_stationary_point()
        .ok_or(ProblemError::UncertifiedOptimum(mean.as_str()))?;
    if !region.contains(&theta_star) {
        return Err(ProblemError::StationaryPointOutside);
    }
    Ok((theta_star, value))
}

/// Closed-form mean evaluation; see [`MeanFunction::value`].
pub fn mean_value(mean: &MeanFunction, theta: &[f64]) -> f64 {
    mean.value(theta)
}

/// A mean function, noise case, and feasible region bundled with the ground
/// truth needed for harness metrics. Immutable and freely shareable.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub mean: MeanFunction,
    pub case: NoiseCase,
    pub region: FeasibleRegion,
    /// Certified minimizer/maximizer; `None` for reference-only problems.
    pub theta_star: Option<Vec<f64>>,
    /// Optimal mean output; a config-declared reference when not certified.
    pub mu_star: f64,
    /// Noise scale at the optimum, when the optimum location is certified.
    pub sigma_star: Option<f64>,
}

impl Problem {
    /// Builds a problem whose optimum is certified in closed form.
    pub fn new(
        mean: MeanFunction,
        case: NoiseCase,
        region: FeasibleRegion,
    ) -> Result<Self, ProblemError> {
        check_case_compatible(&mean, &case)?;
        let (theta_star, mu_star) = true_optimum(&mean, &region)?;
        let norm = euclidean_norm(&theta_star);
        let sigma_star = case.sigma_at(mu_star, norm)?;
        Ok(Self {
            mean,
            case,
            region,
            theta_star: Some(theta_star),
            mu_star,
            sigma_star: Some(sigma_star),
        })
    }

    /// Builds a problem around a reference optimal value (for functions like
    /// Perm(0,10,10) whose optimum is not claimed analytically). Parameter
    /// metrics that require the optimum location are skipped downstream.
    pub fn with_reference_optimum(
        mean: MeanFunction,
        case: NoiseCase,
        region: FeasibleRegion,
        mu_star: f64,
    ) -> Result<Self, ProblemError> {
        check_case_compatible(&mean, &case)?;
        if region.dim() != mean.dim() {
            return Err(ProblemError::RegionMismatch {
                region: region.dim(),
                function: mean.dim(),
            });
        }
        Ok(Self {
            mean,
            case,
            region,
            theta_star: None,
            mu_star,
            sigma_star: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    pub fn direction(&self) -> OptimDirection {
        self.mean.direction()
    }

    /// `"<mean>:<case>"`, the id used by configuration files and CSV keys.
    pub fn id(&self) -> String {
        format!("{}:{}", self.mean.as_str(), self.case.as_str())
    }

    /// Noise standard deviation at a query point.
    pub fn sigma_at(&self, theta: &[f64]) -> Result<f64, ProblemError> {
        let mean = self.mean.value(theta);
        Ok(self.case.sigma_at(mean, euclidean_norm(theta))?)
    }

    /// Draws `count` independent realizations of the output at `theta`.
    pub fn draws(
        &self,
        theta: &[f64],
        count: usize,
        rng: &mut RngStream,
    ) -> Result<Vec<f64>, ProblemError> {
        let mean = self.mean.value(theta);
        let sigma = self.case.sigma_at(mean, euclidean_norm(theta))?;
        (0..count)
            .map(|_| Ok(sample_output(&self.case, mean, sigma, rng)?))
            .collect()
    }

    /// Average of `count` independent realizations at `theta`.
    pub fn batch_mean(
        &self,
        theta: &[f64],
        count: usize,
        rng: &mut RngStream,
    ) -> Result<f64, ProblemError> {
        let mean = self.mean.value(theta);
        let sigma = self.case.sigma_at(mean, euclidean_norm(theta))?;
        let mut sum = 0.0;
        for _ in 0..count {
            sum += sample_output(&self.case, mean, sigma, rng)?;
        }
        Ok(sum / count as f64)
    }
}

fn check_case_compatible(mean: &MeanFunction, case: &NoiseCase) -> Result<(), ProblemError> {
    if matches!(case, NoiseCase::Bernoulli) && !mean.bernoulli_compatible() {
        return Err(ProblemError::BernoulliIncompatible(mean.as_str()));
    }
    Ok(())
}

pub(crate) fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
