//! The six algorithm engines sharing one stepping contract.
//!
//! Every engine draws a uniform sphere direction, estimates the gradient and
//! a performance observation from batched oracle queries, projects the
//! parameter update back onto the feasible region, and feeds the observation
//! into its own mean/variance recursions:
//!
//! * `spsa-si` — central differences; constant-step mean, `1/(k+1)` variance
//! * `ordinary` — central differences; `1/(k+1)` for both recursions
//! * `forward` — one-sided differences; observes the unperturbed point
//! * `four-point` — Richardson-extrapolated differences at `+-c` and `+-hc`
//! * `mts` — central differences; decaying `gamma_k`/`zeta_k` recursions
//! * `mts-four-point` — four-point estimates inside the `mts` recursions
//!
//! A single run is strictly sequential; distinct runs may execute
//! concurrently on disjoint random streams.

use crate::model::{
    AlgorithmId, Checkpoint, FeasibleRegion, IterateState, RunConfig, RunResult, StepSchedule,
};
use crate::problems::{OptimDirection, Problem, ProblemError};
use crate::rng::{sample_unit_sphere, RandomnessError, RngStream};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("invalid algorithm spec: {0}")]
    BadSpec(String),
    #[error("oracle failure at iteration {k}: {source}")]
    Oracle { k: usize, source: ProblemError },
    #[error("non-finite state at iteration {k}")]
    NonFiniteState { k: usize },
    #[error(transparent)]
    Randomness(#[from] RandomnessError),
}

/// Which denominator the four-point gradient divides by.
///
/// The Richardson-extrapolated derivation gives `2 h (h^2 - 1) c`; the
/// alternative `2 h^2 (h - 1) c` form is kept behind this switch because it
/// differs by a systematic `(h + 1) / h` factor on linear functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FourPointDenominator {
    #[default]
    RichardsonCorrected,
    AsPrinted,
}

impl FourPointDenominator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::RichardsonCorrected => "richardson-corrected",
            Self::AsPrinted => "as-printed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "richardson-corrected" => Some(Self::RichardsonCorrected),
            "as-printed" => Some(Self::AsPrinted),
            _ => None,
        }
    }
}

/// Engine selection plus the per-family hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmSpec {
    pub id: AlgorithmId,
    /// Four-point outer spacing multiplier, `h > 1`.
    pub h: f64,
    /// Decay exponent of `gamma_k = (k+1)^-delta` in the MTS mean recursion.
    pub mts_gamma_exponent: f64,
    /// Decay exponent of `zeta_k` in the MTS variance recursion.
    pub mts_zeta_exponent: f64,
    pub denominator: FourPointDenominator,
}

impl AlgorithmSpec {
    pub fn new(id: AlgorithmId) -> Self {
        Self {
            id,
            h: 3.0,
            mts_gamma_exponent: 0.666,
            mts_zeta_exponent: 0.55,
            denominator: FourPointDenominator::default(),
        }
    }

    fn uses_four_point(&self) -> bool {
        matches!(self.id, AlgorithmId::FourPoint | AlgorithmId::MtsFourPoint)
    }

    fn uses_mts_scales(&self) -> bool {
        matches!(self.id, AlgorithmId::Mts | AlgorithmId::MtsFourPoint)
    }

    /// Splits the batch across the inner and outer perturbation pairs so
    /// that `tau1 / tau2` approximates `h` with `tau1 + tau2 = tau`.
    pub fn tau_split(&self, tau: usize) -> (usize, usize) {
        let tau2 = (tau as f64 / (1.0 + self.h)).round() as usize;
        (tau - tau2, tau2)
    }

    pub fn validate(&self, config: &RunConfig) -> Result<(), OptimizerError> {
        if self.uses_four_point() {
            if !(self.h > 1.0) {
                return Err(OptimizerError::BadSpec(format!(
                    "four-point spacing h must exceed 1, got {}",
                    self.h
                )));
            }
            let (tau1, tau2) = self.tau_split(config.batch_size);
            if tau1 == 0 || tau2 == 0 {
                return Err(OptimizerError::BadSpec(format!(
                    "batch size {} cannot be split across spacing h = {}",
                    config.batch_size, self.h
                )));
            }
        }
        if self.uses_mts_scales() {
            let StepSchedule::PowerDecay { exponent: eta, .. } = config.a_schedule else {
                return Err(OptimizerError::BadSpec(
                    "mts variants require a power-decay optimization schedule".into(),
                ));
            };
            if !(eta > self.mts_gamma_exponent && self.mts_gamma_exponent > self.mts_zeta_exponent)
            {
                return Err(OptimizerError::BadSpec(format!(
                    "mts exponents must satisfy eta > delta > zeta, got {} > {} > {}",
                    eta, self.mts_gamma_exponent, self.mts_zeta_exponent
                )));
            }
            if !(self.mts_zeta_exponent > 0.0) {
                return Err(OptimizerError::BadSpec(
                    "mts zeta exponent must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One iteration's gradient estimate and the performance observation fed to
/// the mean recursion. `g` is always a scalar multiple of the drawn
/// direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub g: Vec<f64>,
    pub y_bar: f64,
}

fn offset_point(theta: &[f64], direction: &[f64], scale: f64) -> Vec<f64> {
    theta
        .iter()
        .zip(direction)
        .map(|(t, u)| t + scale * u)
        .collect()
}

fn scaled(direction: &[f64], coefficient: f64) -> Vec<f64> {
    direction.iter().map(|u| coefficient * u).collect()
}

/// Central-difference estimate from `tau` draws at each of `theta +- c u`.
pub fn spsa_gradient(
    problem: &Problem,
    theta: &[f64],
    c: f64,
    u: &[f64],
    tau: usize,
    rng: &mut RngStream,
) -> Result<GradientEstimate, ProblemError> {
    let y_plus = problem.batch_mean(&offset_point(theta, u, c), tau, rng)?;
    let y_minus = problem.batch_mean(&offset_point(theta, u, -c), tau, rng)?;
    Ok(GradientEstimate {
        g: scaled(u, (y_plus - y_minus) / (2.0 * c)),
        y_bar: (y_plus + y_minus) / 2.0,
    })
}

/// One-sided estimate from `tau` draws at `theta + c u` and `tau` draws at
/// `theta` itself; the unperturbed batch mean is the performance observation.
pub fn forward_gradient(
    problem: &Problem,
    theta: &[f64],
    c: f64,
    u: &[f64],
    tau: usize,
    rng: &mut RngStream,
) -> Result<GradientEstimate, ProblemError> {
    let y_plus = problem.batch_mean(&offset_point(theta, u, c), tau, rng)?;
    let y_center = problem.batch_mean(theta, tau, rng)?;
    Ok(GradientEstimate {
        g: scaled(u, (y_plus - y_center) / c),
        y_bar: y_center,
    })
}

/// Four-point estimate from `tau1` draws at each of `theta +- c u` and
/// `tau2` draws at each of `theta +- h c u`. The combination cancels the
/// quadratic perturbation bias of the performance observation exactly.
#[allow(clippy::too_many_arguments)]
pub fn four_point_gradient(
    problem: &Problem,
    theta: &[f64],
    c: f64,
    u: &[f64],
    h: f64,
    tau1: usize,
    tau2: usize,
    denominator: FourPointDenominator,
    rng: &mut RngStream,
) -> Result<GradientEstimate, ProblemError> {
    let y_plus = problem.batch_mean(&offset_point(theta, u, c), tau1, rng)?;
    let y_minus = problem.batch_mean(&offset_point(theta, u, -c), tau1, rng)?;
    let y_h_plus = problem.batch_mean(&offset_point(theta, u, h * c), tau2, rng)?;
    let y_h_minus = problem.batch_mean(&offset_point(theta, u, -h * c), tau2, rng)?;

    let numerator = -y_h_plus + h.powi(3) * y_plus - h.powi(3) * y_minus + y_h_minus;
    let denom = match denominator {
        FourPointDenominator::RichardsonCorrected => 2.0 * h * (h * h - 1.0) * c,
        FourPointDenominator::AsPrinted => 2.0 * h * h * (h - 1.0) * c,
    };
    let y_hat =
        (-y_h_plus + h * h * y_plus + h * h * y_minus - y_h_minus) / (2.0 * (h * h - 1.0));
    Ok(GradientEstimate {
        g: scaled(u, numerator / denom),
        y_bar: y_hat,
    })
}

/// Euclidean projection onto the region; see [`FeasibleRegion::project`].
pub fn project(region: &FeasibleRegion, point: &[f64]) -> Vec<f64> {
    region.project(point)
}

/// Advances the state by one full iteration using the region's closed-form
/// projection.
pub fn step(
    spec: &AlgorithmSpec,
    state: IterateState,
    config: &RunConfig,
    problem: &Problem,
    rng: &mut RngStream,
) -> Result<IterateState, OptimizerError> {
    step_with_projection(spec, state, config, problem, |p| config.region.project(p), rng)
}

/// Advances the state by one full iteration with a caller-supplied convex
/// projection, for feasible sets beyond boxes and balls.
pub fn step_with_projection<P>(
    spec: &AlgorithmSpec,
    state: IterateState,
    config: &RunConfig,
    problem: &Problem,
    project: P,
    rng: &mut RngStream,
) -> Result<IterateState, OptimizerError>
where
    P: Fn(&[f64]) -> Vec<f64>,
{
    let k = state.k;
    debug_assert!(k < config.n_iterations, "stepping past the terminal index");
    let a = config.a_schedule.at(k);
    let c = config.c_schedule.at(k);
    let tau = config.batch_size;
    let u = sample_unit_sphere(config.dim, rng)?;

    let oracle_err = |source: ProblemError| OptimizerError::Oracle { k, source };
    let estimate = match spec.id {
        AlgorithmId::SpsaSi | AlgorithmId::Ordinary | AlgorithmId::Mts => {
            spsa_gradient(problem, &state.theta, c, &u, tau, rng).map_err(oracle_err)?
        }
        AlgorithmId::Forward => {
            forward_gradient(problem, &state.theta, c, &u, tau, rng).map_err(oracle_err)?
        }
        AlgorithmId::FourPoint | AlgorithmId::MtsFourPoint => {
            let (tau1, tau2) = spec.tau_split(tau);
            four_point_gradient(
                problem,
                &state.theta,
                c,
                &u,
                spec.h,
                tau1,
                tau2,
                spec.denominator,
                rng,
            )
            .map_err(oracle_err)?
        }
    };

    // Descend for minimization, ascend for maximization.
    let step_sign = match problem.direction() {
        OptimDirection::Minimize => -1.0,
        OptimDirection::Maximize => 1.0,
    };
    let proposed: Vec<f64> = state
        .theta
        .iter()
        .zip(&estimate.g)
        .map(|(t, g)| t + step_sign * a * g)
        .collect();
    let theta = project(&proposed);

    // The variance update consumes the residual against the pre-update mean.
    let residual = estimate.y_bar - state.mu;
    let kf = (k + 1) as f64;
    let (mu_step, v_step, r) = match spec.id {
        AlgorithmId::SpsaSi => (config.gamma, 1.0 / kf, config.weight_mode.weight(k)),
        AlgorithmId::Ordinary | AlgorithmId::Forward | AlgorithmId::FourPoint => {
            (1.0 / kf, 1.0 / kf, config.weight_mode.weight(k))
        }
        AlgorithmId::Mts | AlgorithmId::MtsFourPoint => (
            kf.powf(-spec.mts_gamma_exponent),
            kf.powf(-spec.mts_zeta_exponent),
            1.0,
        ),
    };
    let v = state.v + v_step * (r * residual * residual - state.v);
    let mu = state.mu + mu_step * residual;

    if !(theta.iter().all(|t| t.is_finite()) && mu.is_finite() && v.is_finite()) {
        return Err(OptimizerError::NonFiniteState { k });
    }
    debug_assert!(v >= 0.0, "variance estimate went negative");

    Ok(IterateState {
        k: k + 1,
        theta,
        mu,
        v,
    })
}

/// Runs `n` iterations, recording snapshots at the requested indices
/// (index `k` means the state after `k` completed iterations).
pub fn run(
    spec: &AlgorithmSpec,
    config: &RunConfig,
    problem: &Problem,
    rng: &mut RngStream,
    checkpoint_schedule: &[usize],
) -> Result<RunResult, OptimizerError> {
    run_with_projection(
        spec,
        config,
        problem,
        |p| config.region.project(p),
        rng,
        checkpoint_schedule,
    )
}

/// [`run`] with a caller-supplied convex projection.
pub fn run_with_projection<P>(
    spec: &AlgorithmSpec,
    config: &RunConfig,
    problem: &Problem,
    project: P,
    rng: &mut RngStream,
    checkpoint_schedule: &[usize],
) -> Result<RunResult, OptimizerError>
where
    P: Fn(&[f64]) -> Vec<f64>,
{
    spec.validate(config)?;
    debug_assert!(
        checkpoint_schedule.windows(2).all(|w| w[0] < w[1]),
        "checkpoint schedule must be strictly increasing"
    );

    fn snapshot(state: &IterateState) -> Checkpoint {
        Checkpoint {
            k: state.k,
            theta: state.theta.clone(),
            mu: state.mu,
            v: state.v,
        }
    }

    let mut state = IterateState::initial(config);
    let mut checkpoints = Vec::with_capacity(checkpoint_schedule.len());
    let mut cp_idx = 0;
    if checkpoint_schedule.first() == Some(&0) {
        checkpoints.push(snapshot(&state));
        cp_idx = 1;
    }
    for _ in 0..config.n_iterations {
        state = step_with_projection(spec, state, config, problem, &project, rng)?;
        if cp_idx < checkpoint_schedule.len() && checkpoint_schedule[cp_idx] == state.k {
            checkpoints.push(snapshot(&state));
            cp_idx += 1;
        }
    }
    Ok(RunResult {
        algorithm: spec.id,
        final_state: state,
        checkpoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WeightMode;
    use crate::problems::MeanFunction;
    use crate::rng::{split_stream, NoiseCase, SinusoidSigma};

    fn noiseless() -> NoiseCase {
        NoiseCase::Normal(SinusoidSigma {
            amplitude: 0.0,
            baseline: 0.0,
        })
    }

    fn noisy() -> NoiseCase {
        NoiseCase::Normal(SinusoidSigma::default())
    }

    fn sharp_problem(case: NoiseCase) -> Problem {
        Problem::new(
            MeanFunction::Quad1dSharp,
            case,
            MeanFunction::Quad1dSharp.default_region(),
        )
        .unwrap()
    }

    fn config(n: usize, a: StepSchedule, c: StepSchedule) -> RunConfig {
        RunConfig {
            dim: 1,
            n_iterations: n,
            batch_size: 1,
            a_schedule: a,
            c_schedule: c,
            gamma: 0.05,
            alpha: 0.05,
            theta0: vec![0.5],
            mu0: 0.0,
            v0: 0.0,
            region: FeasibleRegion::symmetric_box(1, 2.0).unwrap(),
            weight_mode: WeightMode::Unit,
            seed: 0,
        }
    }

    #[test]
    fn spsa_gradient_exact_on_quadratics() {
        // derivative 2t - 2 is recovered exactly: even-order terms cancel.
        let problem = sharp_problem(noiseless());
        let mut rng = split_stream(1, 0);
        for &(t, u) in &[(0.0, 1.0), (0.3, -1.0), (-1.2, 1.0)] {
            let est = spsa_gradient(&problem, &[t], 0.1, &[u], 1, &mut rng).unwrap();
            let expected = (2.0 * t - 2.0) * u * u;
            assert!((est.g[0] - expected).abs() < 1e-12);
            // perturbation bias c^2 on this parabola
            let mu = problem.mean.value(&[t]);
            assert!((est.y_bar - (mu + 0.01)).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_gradient_bias_is_visible() {
        // on t^2 at t=1 (shifted parabola): forward difference of
        // t^2 - 2t + 1.5 at 1.0 with c = 0.1 gives slope c = 0.1
        let problem = sharp_problem(noiseless());
        let mut rng = split_stream(1, 0);
        let est = forward_gradient(&problem, &[1.0], 0.1, &[1.0], 1, &mut rng).unwrap();
        // mu(1.1) - mu(1.0) = 0.01, over c = 0.1
        assert!((est.g[0] - 0.1).abs() < 1e-12);
        // y_bar observes the unperturbed point exactly
        assert!((est.y_bar - 0.5).abs() < 1e-15);
    }

    #[test]
    fn four_point_richardson_identities() {
        let problem = sharp_problem(noiseless());
        let mut rng = split_stream(1, 0);
        // quadratic cancellation: y_hat equals mu(theta) exactly
        for &t in &[0.0, 0.4, -1.5] {
            let est = four_point_gradient(
                &problem,
                &[t],
                0.1,
                &[1.0],
                3.0,
                15,
                5,
                FourPointDenominator::RichardsonCorrected,
                &mut rng,
            )
            .unwrap();
            let mu = problem.mean.value(&[t]);
            assert!(
                (est.y_bar - mu).abs() < 1e-12,
                "y_hat {} vs mu {mu}",
                est.y_bar
            );
            // exact slope on quadratics in richardson mode
            assert!((est.g[0] - (2.0 * t - 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn four_point_as_printed_factor() {
        // On a locally linear stretch the as-printed denominator inflates
        // the slope by (h + 1) / h. Compare the two modes directly: the
        // numerator is shared, so the ratio is exact for any function.
        let problem = sharp_problem(noiseless());
        let mut a = split_stream(2, 0);
        let mut b = split_stream(2, 0);
        let corrected = four_point_gradient(
            &problem,
            &[0.3],
            0.1,
            &[1.0],
            3.0,
            15,
            5,
            FourPointDenominator::RichardsonCorrected,
            &mut a,
        )
        .unwrap();
        let printed = four_point_gradient(
            &problem,
            &[0.3],
            0.1,
            &[1.0],
            3.0,
            15,
            5,
            FourPointDenominator::AsPrinted,
            &mut b,
        )
        .unwrap();
        let ratio = printed.g[0] / corrected.g[0];
        assert!((ratio - 4.0 / 3.0).abs() < 1e-12, "ratio {ratio}");
        assert_eq!(printed.y_bar, corrected.y_bar);
    }

    #[test]
    fn projection_examples() {
        let boxed = FeasibleRegion::symmetric_box(2, 2.0).unwrap();
        assert_eq!(project(&boxed, &[3.0, 0.5]), vec![2.0, 0.5]);
        assert_eq!(project(&boxed, &[1.0, -1.0]), vec![1.0, -1.0]);

        let ball = FeasibleRegion::ball(vec![0.0, 0.0], 1.0).unwrap();
        let projected = project(&ball, &[3.0, 4.0]);
        assert!((projected[0] - 0.6).abs() < 1e-15);
        assert!((projected[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn step_worked_example() {
        // noiseless sharp parabola, theta0 = 0, a0 = 0.5, c0 = 0.1
        let problem = sharp_problem(noiseless());
        let mut cfg = config(
            1,
            StepSchedule::power_decay(0.5, 1.0).unwrap(),
            StepSchedule::power_decay(0.1, 0.2).unwrap(),
        );
        cfg.theta0 = vec![0.0];
        let spec = AlgorithmSpec::new(AlgorithmId::SpsaSi);
        let state = IterateState::initial(&cfg);
        let mut rng = split_stream(9, 4);
        let next = step(&spec, state, &cfg, &problem, &mut rng).unwrap();
        assert!((next.theta[0] - 1.0).abs() < 1e-12, "theta1 {}", next.theta[0]);
        assert!((next.mu - 0.0755).abs() < 1e-12, "mu1 {}", next.mu);
        assert!((next.v - 2.2801).abs() < 1e-12, "v1 {}", next.v);
        assert_eq!(next.k, 1);
    }

    #[test]
    fn run_with_zero_iterations_returns_initial_state() {
        let problem = sharp_problem(noisy());
        let cfg = config(
            0,
            StepSchedule::power_decay(30.0, 1.0).unwrap(),
            StepSchedule::power_decay(1.0, 0.2).unwrap(),
        );
        let spec = AlgorithmSpec::new(AlgorithmId::SpsaSi);
        let mut rng = split_stream(0, 0);
        let result = run(&spec, &cfg, &problem, &mut rng, &[0]).unwrap();
        assert_eq!(result.final_state, IterateState::initial(&cfg));
        assert_eq!(result.checkpoints.len(), 1);
        assert_eq!(result.checkpoints[0].k, 0);
    }

    #[test]
    fn noiseless_descent_converges() {
        // a_k = 1/(k+1) on the noiseless parabola: plain gradient descent.
        let problem = sharp_problem(noiseless());
        let cfg = config(
            10_000,
            StepSchedule::power_decay(1.0, 1.0).unwrap(),
            StepSchedule::power_decay(1.0, 0.2).unwrap(),
        );
        let spec = AlgorithmSpec::new(AlgorithmId::SpsaSi);
        let mut rng = split_stream(1, 1);
        let result = run(&spec, &cfg, &problem, &mut rng, &[10_000]).unwrap();
        assert!(
            (result.final_state.theta[0] - 1.0).abs() < 0.05,
            "terminal theta {}",
            result.final_state.theta[0]
        );
    }

    #[test]
    fn fixed_seed_runs_are_bit_identical() {
        let problem = sharp_problem(noisy());
        let mut cfg = config(
            300,
            StepSchedule::power_decay(30.0, 1.0).unwrap(),
            StepSchedule::power_decay(1.0, 0.2).unwrap(),
        );
        cfg.batch_size = 5;
        for id in AlgorithmId::ALL {
            let spec = AlgorithmSpec::new(id);
            let mut rng_a = split_stream(77, 5);
            let mut rng_b = split_stream(77, 5);
            let a = run(&spec, &cfg, &problem, &mut rng_a, &[100, 300]).unwrap();
            let b = run(&spec, &cfg, &problem, &mut rng_b, &[100, 300]).unwrap();
            assert_eq!(a, b, "{id} diverged across identical streams");
        }
    }

    #[test]
    fn iterates_stay_feasible_and_variance_non_negative() {
        let problem = sharp_problem(noisy());
        let mut cfg = config(
            500,
            StepSchedule::power_decay(30.0, 1.0).unwrap(),
            StepSchedule::power_decay(1.0, 0.2).unwrap(),
        );
        cfg.batch_size = 3;
        cfg.weight_mode = WeightMode::KOverKPlusOne;
        for id in AlgorithmId::ALL {
            let spec = AlgorithmSpec::new(id);
            let mut rng = split_stream(3, 8);
            let mut state = IterateState::initial(&cfg);
            for _ in 0..cfg.n_iterations {
                state = step(&spec, state, &cfg, &problem, &mut rng).unwrap();
                assert!(cfg.region.contains(&state.theta), "{id}: {:?}", state.theta);
                assert!(state.v >= 0.0, "{id}: v = {}", state.v);
            }
        }
    }

    #[test]
    fn gradient_is_rank_one() {
        let problem = Problem::new(
            MeanFunction::quad2d_default(),
            noisy(),
            MeanFunction::quad2d_default().default_region(),
        )
        .unwrap();
        let mut rng = split_stream(21, 0);
        let u = sample_unit_sphere(2, &mut rng).unwrap();
        let est = spsa_gradient(&problem, &[0.2, -0.4], 0.1, &u, 4, &mut rng).unwrap();
        let ratio0 = est.g[0] / u[0];
        let ratio1 = est.g[1] / u[1];
        assert!((ratio0 - ratio1).abs() < 1e-9 * ratio0.abs().max(1.0));
    }

    #[test]
    fn oracle_domain_errors_carry_the_iteration() {
        // quad1d-wu turns negative outside [0, 1]; with c0 = 1 the very
        // first perturbed query leaves the gamma domain.
        let problem = Problem::new(
            MeanFunction::Quad1dWu,
            NoiseCase::gamma(4.0).unwrap(),
            MeanFunction::Quad1dWu.default_region(),
        )
        .unwrap();
        let mut cfg = config(
            10,
            StepSchedule::power_decay(30.0, 1.0).unwrap(),
            StepSchedule::power_decay(1.0, 0.2).unwrap(),
        );
        cfg.region = MeanFunction::Quad1dWu.default_region();
        cfg.theta0 = vec![0.5];
        let spec = AlgorithmSpec::new(AlgorithmId::SpsaSi);
        let mut rng = split_stream(0, 0);
        match run(&spec, &cfg, &problem, &mut rng, &[10]) {
            Err(OptimizerError::Oracle { k: 0, .. }) => {}
            other => panic!("expected oracle failure at k = 0, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_states_abort_with_the_iteration() {
        let problem = sharp_problem(noiseless());
        let cfg = config(
            10,
            StepSchedule::power_decay(0.5, 1.0).unwrap(),
            StepSchedule::power_decay(0.1, 0.2).unwrap(),
        );
        let spec = AlgorithmSpec::new(AlgorithmId::SpsaSi);
        let mut rng = split_stream(0, 0);
        let poisoned = |_p: &[f64]| vec![f64::NAN];
        match run_with_projection(&spec, &cfg, &problem, poisoned, &mut rng, &[]) {
            Err(OptimizerError::NonFiniteState { k: 0 }) => {}
            other => panic!("expected non-finite abort at k = 0, got {other:?}"),
        }
    }

    #[test]
    fn tau_split_examples() {
        let spec = AlgorithmSpec::new(AlgorithmId::FourPoint);
        assert_eq!(spec.tau_split(20), (15, 5));
        assert_eq!(spec.tau_split(50), (37, 13));
        let cfg = {
            let mut c = config(
                1,
                StepSchedule::power_decay(1.0, 1.0).unwrap(),
                StepSchedule::power_decay(1.0, 0.2).unwrap(),
            );
            c.batch_size = 1;
            c
        };
        assert!(spec.validate(&cfg).is_err(), "tau = 1 cannot be split");
    }

    #[test]
    fn mts_exponent_ordering_is_enforced() {
        let mut spec = AlgorithmSpec::new(AlgorithmId::Mts);
        let cfg = config(
            1,
            StepSchedule::power_decay(1.0, 1.0).unwrap(),
            StepSchedule::power_decay(1.0, 0.2).unwrap(),
        );
        assert!(spec.validate(&cfg).is_ok());
        spec.mts_gamma_exponent = 0.5;
        assert!(spec.validate(&cfg).is_err(), "delta below zeta must fail");
    }
}
