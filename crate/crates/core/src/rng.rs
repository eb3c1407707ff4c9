//! Deterministic, seedable random sources.
//!
//! Every replication owns an [`RngStream`]: a ChaCha8 generator keyed by
//! `(seed, stream_id)`. ChaCha exposes independent streams by construction,
//! so distinct replications never share variates and results do not depend
//! on worker scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RandomnessError {
    #[error("unit-sphere dimension must be at least 1")]
    ZeroDimension,
    #[error("bernoulli mean must lie in [0, 1], got {0}")]
    BernoulliMeanOutOfRange(f64),
    #[error("{case} requires a positive mean, got {mean}")]
    NonPositiveMean { case: &'static str, mean: f64 },
    #[error("gamma shape must be positive, got {0}")]
    BadGammaShape(f64),
    #[error("pareto shape must exceed 2 for finite variance, got {0}")]
    BadParetoShape(f64),
    #[error("lognormal log-scale must be positive, got {0}")]
    BadLognormalScale(f64),
}

/// Counter-keyed random stream. Identical `(seed, stream_id)` pairs reproduce
/// identical variate sequences; distinct stream ids are independent.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// Derives the deterministic stream for one replication index.
pub fn split_stream(seed: u64, replication: u64) -> RngStream {
    RngStream::new(seed, replication)
}

/// Uniform direction on the unit sphere, via a normalized standard Gaussian
/// vector. In one dimension this degenerates to a fair sign draw.
pub fn sample_unit_sphere(dim: usize, rng: &mut RngStream) -> Result<Vec<f64>, RandomnessError> {
    if dim == 0 {
        return Err(RandomnessError::ZeroDimension);
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return Ok(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// Parameters of the location-dependent noise scale used by the Normal case:
/// `sigma(theta) = amplitude * sin(2 pi |theta|) + baseline`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidSigma {
    pub amplitude: f64,
    pub baseline: f64,
}

impl SinusoidSigma {
    /// Evaluates the scale at a given Euclidean norm of theta.
    pub fn at_norm(&self, theta_norm: f64) -> f64 {
        self.amplitude * (2.0 * std::f64::consts::PI * theta_norm).sin() + self.baseline
    }
}

impl Default for SinusoidSigma {
    fn default() -> Self {
        Self {
            amplitude: 1.5,
            baseline: 2.5,
        }
    }
}

/// Output-distribution family for the synthetic black box. Each case shares
/// the problem's mean function and determines the noise law around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseCase {
    /// `Y ~ Bernoulli(mean)`, requires mean in [0, 1].
    Bernoulli,
    /// `Y ~ N(mean, sigma^2)` with `sigma` supplied by the caller (it depends
    /// on the queried point, not just the mean).
    Normal(SinusoidSigma),
    /// `Y ~ Gamma(shape, mean / shape)`, requires mean > 0.
    Gamma { shape: f64 },
    /// `Y ~ Pareto(shape, (shape - 1) mean / shape)`, requires mean > 0.
    Pareto { shape: f64 },
    /// `Y ~ Lognormal(ln mean - s^2 / 2, s^2)`, requires mean > 0.
    Lognormal { s: f64 },
}

impl NoiseCase {
    pub fn gamma(shape: f64) -> Result<Self, RandomnessError> {
        if !(shape > 0.0) {
            return Err(RandomnessError::BadGammaShape(shape));
        }
        Ok(Self::Gamma { shape })
    }

    pub fn pareto(shape: f64) -> Result<Self, RandomnessError> {
        if !(shape > 2.0) {
            return Err(RandomnessError::BadParetoShape(shape));
        }
        Ok(Self::Pareto { shape })
    }

    pub fn lognormal(s: f64) -> Result<Self, RandomnessError> {
        if !(s > 0.0) {
            return Err(RandomnessError::BadLognormalScale(s));
        }
        Ok(Self::Lognormal { s })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Bernoulli => "bernoulli",
            Self::Normal(_) => "normal",
            Self::Gamma { .. } => "gamma",
            Self::Pareto { .. } => "pareto",
            Self::Lognormal { .. } => "lognormal",
        }
    }

    /// Noise standard deviation at a query point, given the mean there and
    /// the point's Euclidean norm (the Normal case's scale is a function of
    /// the location, not the mean).
    pub fn sigma_at(&self, mean: f64, theta_norm: f64) -> Result<f64, RandomnessError> {
        match *self {
            Self::Bernoulli => {
                if !(0.0..=1.0).contains(&mean) {
                    return Err(RandomnessError::BernoulliMeanOutOfRange(mean));
                }
                Ok((mean * (1.0 - mean)).sqrt())
            }
            Self::Normal(params) => Ok(params.at_norm(theta_norm)),
            Self::Gamma { shape } => {
                check_positive_mean("gamma", mean)?;
                Ok(mean / shape.sqrt())
            }
            Self::Pareto { shape } => {
                check_positive_mean("pareto", mean)?;
                Ok(mean / (shape * (shape - 2.0)).sqrt())
            }
            Self::Lognormal { s } => {
                check_positive_mean("lognormal", mean)?;
                Ok(mean * ((s * s).exp() - 1.0).sqrt())
            }
        }
    }
}

fn check_positive_mean(case: &'static str, mean: f64) -> Result<(), RandomnessError> {
    if mean > 0.0 {
        Ok(())
    } else {
        Err(RandomnessError::NonPositiveMean { case, mean })
    }
}

/// Draws one realization of the output with the given expected value.
///
/// `sigma` is consumed only by the Normal case, whose scale depends on the
/// queried location; the other cases derive their spread from `mean`.
pub fn sample_output(
    case: &NoiseCase,
    mean: f64,
    sigma: f64,
    rng: &mut RngStream,
) -> Result<f64, RandomnessError> {
    match *case {
        NoiseCase::Bernoulli => {
            if !(0.0..=1.0).contains(&mean) {
                return Err(RandomnessError::BernoulliMeanOutOfRange(mean));
            }
            Ok(if rng.uniform() < mean { 1.0 } else { 0.0 })
        }
        NoiseCase::Normal(_) => Ok(mean + sigma * rng.standard_normal()),
        NoiseCase::Gamma { shape } => {
            check_positive_mean("gamma", mean)?;
            Ok(sample_gamma(shape, mean / shape, rng))
        }
        NoiseCase::Pareto { shape } => {
            check_positive_mean("pareto", mean)?;
            let scale = (shape - 1.0) * mean / shape;
            // Inverse CDF: x_m * (1 - U)^(-1/alpha), with 1 - U in (0, 1].
            Ok(scale * (1.0 - rng.uniform()).powf(-1.0 / shape))
        }
        NoiseCase::Lognormal { s } => {
            check_positive_mean("lognormal", mean)?;
            Ok((mean.ln() - s * s / 2.0 + s * rng.standard_normal()).exp())
        }
    }
}

/// Marsaglia-Tsang squeeze sampler for Gamma(shape, scale). Shapes below 1
/// are boosted through Gamma(shape + 1) and a uniform power.
fn sample_gamma(shape: f64, scale: f64, rng: &mut RngStream) -> f64 {
    if shape < 1.0 {
        let boost = rng.uniform().powf(1.0 / shape);
        return sample_gamma(shape + 1.0, scale, rng) * boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        if u < 1.0 - 0.0331 * x * x * x * x {
            return d * v * scale;
        }
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v * scale;
        }
    }
}
