//! Oracle-backed checks of the inference primitives: the quantile against an
//! independent quadrature CDF, and the variance diagnostic against exactly
//! simulated mean-reverting paths.

mod common;

use bbo_infer::inference::{ou_variance_diagnostic, z_quantile};
use bbo_infer::split_stream;
use common::phi;

#[test]
fn quantile_round_trips_through_quadrature_cdf() {
    for alpha in [0.5, 0.1, 0.05, 0.01] {
        let z = z_quantile(alpha).unwrap();
        let p = phi(z);
        assert!(
            (p - (1.0 - alpha / 2.0)).abs() <= 1e-8,
            "alpha {alpha}: Phi(z) = {p}"
        );
    }
}

#[test]
fn one_sigma_alpha_gives_unit_quantile() {
    // alpha = 2 Phi(-1) computed by the quadrature oracle
    let alpha = 2.0 * phi(-1.0);
    let z = z_quantile(alpha).unwrap();
    assert!((z - 1.0).abs() < 1e-8, "z = {z}");
}

/// Simulates discrete observations of `dU = -U dt + s dW` at spacing
/// `gamma` using the exact transition law.
fn simulate_ou(deviation: f64, gamma: f64, steps: usize, seed: u64) -> Vec<f64> {
    let mut rng = split_stream(seed, 0);
    let decay = (-gamma).exp();
    let innovation_sd = (deviation * (1.0 - (-2.0 * gamma).exp()) / 2.0).sqrt();
    let mut u = 0.0;
    let mut path = Vec::with_capacity(steps + 1);
    path.push(u);
    for _ in 0..steps {
        u = decay * u + innovation_sd * rng.standard_normal();
        path.push(u);
    }
    path
}

#[test]
fn diagnostic_recovers_the_deviation_of_an_exact_ou_path() {
    let deviation = 0.15625;
    let gamma = 0.01;
    let steps = 1_000_000;
    // The diagnostic consumes a mu-series; map U back through
    // mu = mu* + sqrt(gamma) U.
    let mu_star = 0.5;
    let series: Vec<f64> = simulate_ou(deviation, gamma, steps, 909)
        .into_iter()
        .map(|u| mu_star + gamma.sqrt() * u)
        .collect();
    let estimate = ou_variance_diagnostic(&series, mu_star, gamma).unwrap();
    assert!(
        (estimate - deviation).abs() < 0.02 * deviation,
        "estimate {estimate} vs {deviation}"
    );
}

#[test]
fn diagnostic_tracks_other_deviation_scales() {
    let deviation = 0.5;
    let gamma = 0.005;
    let series: Vec<f64> = simulate_ou(deviation, gamma, 400_000, 910)
        .into_iter()
        .map(|u| 1.0 + gamma.sqrt() * u)
        .collect();
    let estimate = ou_variance_diagnostic(&series, 1.0, gamma).unwrap();
    assert!(
        (estimate - deviation).abs() < 0.02 * deviation,
        "estimate {estimate} vs {deviation}"
    );
}
