//! Property tests for the structural invariants.

use bbo_infer::harness::{coverage_fraction, histogram, mean_std};
use bbo_infer::inference::normalized_estimate;
use bbo_infer::model::{min_sample_size, AlgorithmId, FeasibleRegion, StepSchedule};
use bbo_infer::optimizers::AlgorithmSpec;
use proptest::prelude::*;

proptest! {
    #[test]
    fn power_decay_schedules_strictly_decrease(
        scale in 1e-3..1e3f64,
        exponent in 0.01..1.0f64,
        k in 0usize..10_000,
    ) {
        let schedule = StepSchedule::power_decay(scale, exponent).unwrap();
        prop_assert!(schedule.at(k) > schedule.at(k + 1));
        prop_assert!(schedule.at(k) > 0.0);
    }

    #[test]
    fn constant_schedules_are_constant(value in 1e-6..0.999f64, k in 0usize..1_000_000) {
        let schedule = StepSchedule::constant(value).unwrap();
        prop_assert_eq!(schedule.at(k), value);
    }

    #[test]
    fn min_sample_size_monotone(
        lo in 0.01..0.98f64,
        bump in 0.001..0.5f64,
        c in 1.001..5.0f64,
    ) {
        let hi = (lo + bump).min(0.99);
        let at_lo = min_sample_size(lo, c).unwrap();
        let at_hi = min_sample_size(hi, c).unwrap();
        prop_assert!(at_lo >= at_hi, "{at_lo} < {at_hi} for {lo} <= {hi}");
    }

    #[test]
    fn box_projection_lands_inside_and_is_idempotent(
        point in prop::collection::vec(-100.0..100.0f64, 1..6),
    ) {
        let dim = point.len();
        let region = FeasibleRegion::symmetric_box(dim, 2.0).unwrap();
        let projected = region.project(&point);
        prop_assert!(region.contains(&projected));
        prop_assert_eq!(region.project(&projected), projected.clone());
        if region.contains(&point) {
            prop_assert_eq!(projected, point);
        }
    }

    #[test]
    fn ball_projection_lands_inside_and_is_idempotent(
        point in prop::collection::vec(-100.0..100.0f64, 2..5),
        radius in 0.1..10.0f64,
    ) {
        let dim = point.len();
        let region = FeasibleRegion::ball(vec![0.25; dim], radius).unwrap();
        let projected = region.project(&point);
        prop_assert!(region.contains(&projected));
        let twice = region.project(&projected);
        for (a, b) in projected.iter().zip(&twice) {
            prop_assert!((a - b).abs() <= 1e-12 * radius.max(1.0));
        }
    }

    #[test]
    fn histogram_counts_every_value(
        values in prop::collection::vec(-50.0..50.0f64, 0..200),
        bins in 1usize..64,
    ) {
        let hist = histogram(&values, bins, (-4.0, 4.0)).unwrap();
        prop_assert_eq!(hist.counts.iter().sum::<u64>(), values.len() as u64);
    }

    #[test]
    fn coverage_fraction_is_monotone_in_z(
        values in prop::collection::vec(-10.0..10.0f64, 1..100),
        z_lo in 0.0..3.0f64,
        widen in 0.0..3.0f64,
    ) {
        let narrow = coverage_fraction(&values, z_lo);
        let wide = coverage_fraction(&values, z_lo + widen);
        prop_assert!(wide >= narrow);
    }

    #[test]
    fn normalized_estimate_shift_invariant(
        mu in -10.0..10.0f64,
        mu_star in -10.0..10.0f64,
        shift in -100.0..100.0f64,
        v in 0.01..10.0f64,
    ) {
        let spec = AlgorithmSpec::new(AlgorithmId::SpsaSi);
        let base = normalized_estimate(&spec, mu, v, 100, 0.05, mu_star).unwrap();
        let shifted =
            normalized_estimate(&spec, mu + shift, v, 100, 0.05, mu_star + shift).unwrap();
        prop_assert!(
            (base.value - shifted.value).abs() <= 1e-7 * base.value.abs().max(1.0)
        );
    }

    #[test]
    fn mean_std_of_constant_inputs_has_zero_spread(
        value in -100.0..100.0f64,
        count in 1usize..50,
    ) {
        let values = vec![value; count];
        let (mean, sd) = mean_std(&values);
        prop_assert!((mean - value).abs() < 1e-9);
        prop_assert!(sd.abs() < 1e-9);
    }
}
