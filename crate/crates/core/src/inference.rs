//! Confidence-interval construction, per-algorithm normalized estimators,
//! and the mean-reversion variance diagnostic applied to the trajectory of
//! performance estimates.
//!
//! All operations are pure functions of their inputs.

use crate::model::{AlgorithmId, StepSchedule};
use crate::optimizers::AlgorithmSpec;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InferenceError {
    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("gamma must lie in (0, 1), got {0}")]
    GammaOutOfRange(f64),
    #[error("variance estimate must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("variance estimate must be strictly positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("sample index must be at least 1")]
    ZeroSampleIndex,
    #[error("diagnostic window must contain at least 2 points, got {0}")]
    WindowTooShort(usize),
}

/// Two-sided interval `center +- half_width` at confidence `1 - level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    /// Closed-interval membership.
    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() <= self.half_width
    }
}

/// Centered, variance-normalized terminal performance estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedEstimate {
    pub value: f64,
    pub algorithm: AlgorithmId,
}

/// Standard-normal quantile at `1 - alpha / 2`, so that a standard normal
/// lands in `[-z, z]` with probability `1 - alpha`.
///
/// Uses Wichura's rational approximation of the inverse normal CDF
/// (absolute error below 1e-9; no special-function dependency).
pub fn z_quantile(alpha: f64) -> Result<f64, InferenceError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(InferenceError::AlphaOutOfRange(alpha));
    }
    Ok(inverse_normal_cdf(1.0 - alpha / 2.0))
}

/// Horner evaluation; coefficients in ascending order.
fn polynomial(x: f64, coefficients: &[f64]) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Inverse standard-normal CDF on (0, 1), AS 241 rational approximation.
/// Coefficients are kept at the published precision.
#[allow(clippy::excessive_precision)]
fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const CENTRAL_NUM: [f64; 8] = [
        3.387_132_872_796_366_608,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_3e3,
        1.373_169_376_550_946_1e4,
        4.592_195_393_154_987_1e4,
        6.726_577_092_700_870_1e4,
        3.343_057_558_358_812_8e4,
        2.509_080_928_730_122_7e3,
    ];
    const CENTRAL_DEN: [f64; 8] = [
        1.0,
        4.231_333_070_160_091e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_1e3,
        2.121_379_430_158_659_7e4,
        3.930_789_580_009_271_1e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_545_611e3,
    ];
    const MIDDLE_NUM: [f64; 8] = [
        1.423_437_110_749_683_577_3,
        4.630_337_846_156_545_295,
        5.769_497_221_460_691_405,
        3.647_848_324_763_204_605,
        1.270_458_252_452_368_382_5,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const MIDDLE_DEN: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_822,
        1.676_384_830_183_803_849,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_746e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const TAIL_NUM: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369,
        1.784_826_539_917_291_335_8,
        2.965_605_718_285_048_9e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const TAIL_DEN: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_373e-1,
        1.369_298_809_227_358_056e-1,
        1.487_536_129_085_061_485e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_68e-5,
        1.421_511_758_316_445_9e-7,
        2.044_263_103_389_939_7e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * polynomial(r, &CENTRAL_NUM) / polynomial(r, &CENTRAL_DEN);
    }
    let tail_p = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail_p.ln()).sqrt();
    let z = if r <= 5.0 {
        let r = r - 1.6;
        polynomial(r, &MIDDLE_NUM) / polynomial(r, &MIDDLE_DEN)
    } else {
        let r = r - 5.0;
        polynomial(r, &TAIL_NUM) / polynomial(r, &TAIL_DEN)
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}

/// The interval `mu_n +- z_{alpha/2} sqrt(gamma v_n / 2)` reported at the
/// end of a constant-step run.
pub fn algorithm1_ci(
    mu_n: f64,
    v_n: f64,
    gamma: f64,
    alpha: f64,
) -> Result<ConfidenceInterval, InferenceError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(InferenceError::GammaOutOfRange(gamma));
    }
    if v_n < 0.0 {
        return Err(InferenceError::NegativeVariance(v_n));
    }
    let z = z_quantile(alpha)?;
    Ok(ConfidenceInterval {
        center: mu_n,
        half_width: z * (gamma * v_n / 2.0).sqrt(),
        level: alpha,
    })
}

/// Centers the terminal performance estimate and divides by the algorithm's
/// estimated asymptotic standard deviation:
///
/// * `spsa-si`: `(mu - mu*) / sqrt(gamma v / 2)`
/// * `ordinary`, `forward`: `(mu - mu*) / sqrt(v / n)`
/// * `four-point`: `((h^2-1)/(h^2+1)) (mu - mu*) / sqrt(v / n)`
/// * `mts`: `(mu - mu*) / sqrt(gamma_n v)`
/// * `mts-four-point`: `((h^2-1)/(h^2+1)) (mu - mu*) / sqrt(zeta_n v)`
///
/// `gamma_n` and `zeta_n` are the decaying step sizes evaluated at the
/// reporting index `n`.
pub fn normalized_estimate(
    spec: &AlgorithmSpec,
    mu_n: f64,
    v_n: f64,
    n: usize,
    gamma: f64,
    mu_star: f64,
) -> Result<NormalizedEstimate, InferenceError> {
    if !(v_n > 0.0) {
        return Err(InferenceError::NonPositiveVariance(v_n));
    }
    if n == 0 {
        return Err(InferenceError::ZeroSampleIndex);
    }
    let centered = mu_n - mu_star;
    let h2 = spec.h * spec.h;
    let prefactor = (h2 - 1.0) / (h2 + 1.0);
    let value = match spec.id {
        AlgorithmId::SpsaSi => {
            if !(gamma > 0.0 && gamma < 1.0) {
                return Err(InferenceError::GammaOutOfRange(gamma));
            }
            centered / (gamma * v_n / 2.0).sqrt()
        }
        AlgorithmId::Ordinary | AlgorithmId::Forward => centered / (v_n / n as f64).sqrt(),
        AlgorithmId::FourPoint => prefactor * centered / (v_n / n as f64).sqrt(),
        AlgorithmId::Mts => {
            let gamma_n = StepSchedule::PowerDecay {
                scale: 1.0,
                exponent: spec.mts_gamma_exponent,
            }
            .at(n);
            centered / (gamma_n * v_n).sqrt()
        }
        AlgorithmId::MtsFourPoint => {
            let zeta_n = StepSchedule::PowerDecay {
                scale: 1.0,
                exponent: spec.mts_zeta_exponent,
            }
            .at(n);
            prefactor * centered / (zeta_n * v_n).sqrt()
        }
    };
    Ok(NormalizedEstimate {
        value,
        algorithm: spec.id,
    })
}

/// Estimates the squared deviation scale of the mean-reverting limit from a
/// tail window of performance estimates.
///
/// With `U_k = (mu_k - mu*) / sqrt(gamma)` and `N` increments in the window,
/// returns `(1 / (N gamma)) sum (e^gamma U_{k+1} - U_k)^2`, which recovers
/// `sigma^2(theta*) / (2 tau)` as `gamma` shrinks.
pub fn ou_variance_diagnostic(
    mu_series: &[f64],
    mu_star: f64,
    gamma: f64,
) -> Result<f64, InferenceError> {
    if mu_series.len() < 2 {
        return Err(InferenceError::WindowTooShort(mu_series.len()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(InferenceError::GammaOutOfRange(gamma));
    }
    let sqrt_gamma = gamma.sqrt();
    let growth = gamma.exp();
    let increments = mu_series.len() - 1;
    let mut sum = 0.0;
    for pair in mu_series.windows(2) {
        let u_curr = (pair[0] - mu_star) / sqrt_gamma;
        let u_next = (pair[1] - mu_star) / sqrt_gamma;
        let d = growth * u_next - u_curr;
        sum += d * d;
    }
    Ok(sum / (increments as f64 * gamma))
}

/// 1 when the interval contains the true optimal performance, else 0.
pub fn coverage_indicator(ci: &ConfidenceInterval, mu_star: f64) -> u8 {
    ci.contains(mu_star) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_quantile_reference_values() {
        // regression against the fixed two-sided 95% quantile
        assert!((z_quantile(0.05).unwrap() - 1.959963985).abs() < 1e-8);
        assert!((z_quantile(0.5).unwrap() - 0.67448975).abs() < 1e-8);
        // alpha = 2 Phi(-1) makes the quantile exactly 1
        let alpha_one_sigma = 0.31731050786291415;
        assert!((z_quantile(alpha_one_sigma).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn z_quantile_rejects_bad_alpha() {
        assert!(z_quantile(0.0).is_err());
        assert!(z_quantile(1.0).is_err());
        assert!(z_quantile(-0.5).is_err());
    }

    #[test]
    fn z_quantile_tail_branches() {
        // exercise the |q| > 0.425 branches against fixed references
        assert!((inverse_normal_cdf(0.999) - 3.090232306167813).abs() < 1e-9);
        assert!((inverse_normal_cdf(1e-3) + 3.090232306167813).abs() < 1e-9);
        assert!((inverse_normal_cdf(1e-12) + 7.034483825301131).abs() < 1e-8);
    }

    #[test]
    fn ci_worked_example() {
        let ci = algorithm1_ci(0.5, 0.15625, 0.05, 0.05).unwrap();
        assert_eq!(ci.center, 0.5);
        // half-width = z * sqrt(0.05 * 0.15625 / 2) = z * 0.0625
        let expected = z_quantile(0.05).unwrap() * 0.0625;
        assert!((ci.half_width - expected).abs() < 1e-12);
        assert!((ci.half_width - 0.12250).abs() < 5e-6);
    }

    #[test]
    fn ci_degenerate_and_limits() {
        let ci = algorithm1_ci(1.25, 0.0, 0.05, 0.05).unwrap();
        assert_eq!(ci.half_width, 0.0);
        assert!(ci.contains(1.25));
        assert!(!ci.contains(1.2500001));

        // alpha -> 1 collapses the interval
        let ci = algorithm1_ci(0.0, 1.0, 0.05, 1.0 - 1e-9).unwrap();
        assert!(ci.half_width < 1e-8);

        assert!(algorithm1_ci(0.0, -0.1, 0.05, 0.05).is_err());
    }

    #[test]
    fn half_width_scales_as_sqrt_gamma() {
        let narrow = algorithm1_ci(0.0, 0.2, 0.04, 0.05).unwrap();
        let wide = algorithm1_ci(0.0, 0.2, 0.08, 0.05).unwrap();
        let ratio = wide.half_width / narrow.half_width;
        assert!((ratio - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn normalized_estimate_per_algorithm() {
        let si = AlgorithmSpec::new(AlgorithmId::SpsaSi);
        // centered estimate is zero for any positive variance
        let zero = normalized_estimate(&si, 0.47, 0.3, 100, 0.05, 0.47).unwrap();
        assert_eq!(zero.value, 0.0);

        // denominator sqrt(gamma v / 2) = 0.0625 turns a 0.0625 z offset
        // into exactly z
        let z = 1.7;
        let est =
            normalized_estimate(&si, 0.5 + 0.0625 * z, 0.15625, 100, 0.05, 0.5).unwrap();
        assert!((est.value - z).abs() < 1e-12);

        // four-point prefactor (h^2 - 1) / (h^2 + 1) = 0.8 at h = 3
        let fp = AlgorithmSpec::new(AlgorithmId::FourPoint);
        let est = normalized_estimate(&fp, 1.0, 1.0, 4, 0.05, 0.0).unwrap();
        assert!((est.value - 0.8 * 1.0 / 0.5).abs() < 1e-12);

        // mts evaluates gamma_n at the reporting index
        let mts = AlgorithmSpec::new(AlgorithmId::Mts);
        let est = normalized_estimate(&mts, 1.0, 1.0, 9, 0.05, 0.0).unwrap();
        let gamma_n = 10f64.powf(-0.666);
        assert!((est.value - 1.0 / gamma_n.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn normalized_estimate_rejects_degenerate_variance() {
        let si = AlgorithmSpec::new(AlgorithmId::SpsaSi);
        assert_eq!(
            normalized_estimate(&si, 0.5, 0.0, 100, 0.05, 0.5),
            Err(InferenceError::NonPositiveVariance(0.0))
        );
        assert_eq!(
            normalized_estimate(&si, 0.5, 1.0, 0, 0.05, 0.5),
            Err(InferenceError::ZeroSampleIndex)
        );
    }

    #[test]
    fn normalized_estimate_shift_invariance() {
        let si = AlgorithmSpec::new(AlgorithmId::SpsaSi);
        let base = normalized_estimate(&si, 0.61, 0.2, 50, 0.05, 0.47).unwrap();
        for shift in [-3.0, 0.5, 1e3] {
            let shifted =
                normalized_estimate(&si, 0.61 + shift, 0.2, 50, 0.05, 0.47 + shift).unwrap();
            assert!(
                (shifted.value - base.value).abs() < 1e-9 * base.value.abs().max(1.0),
                "shift {shift}: {} vs {}",
                shifted.value,
                base.value
            );
        }
    }

    #[test]
    fn ou_diagnostic_on_constant_series_is_zero() {
        let series = vec![0.47; 100];
        assert_eq!(ou_variance_diagnostic(&series, 0.47, 0.05).unwrap(), 0.0);
    }

    #[test]
    fn ou_diagnostic_rejects_short_windows() {
        assert_eq!(
            ou_variance_diagnostic(&[0.5], 0.5, 0.05),
            Err(InferenceError::WindowTooShort(1))
        );
        assert!(ou_variance_diagnostic(&[0.5, 0.6], 0.5, 1.5).is_err());
    }

    #[test]
    fn coverage_indicator_examples() {
        let ci = ConfidenceInterval {
            center: 0.5,
            half_width: 0.1,
            level: 0.05,
        };
        assert_eq!(coverage_indicator(&ci, 0.47), 1);
        let narrow = ConfidenceInterval {
            center: 0.5,
            half_width: 0.01,
            level: 0.05,
        };
        assert_eq!(coverage_indicator(&narrow, 0.47), 0);
        // boundary counts as covered: the interval is closed
        assert_eq!(coverage_indicator(&ci, 0.6), 1);
    }
}
