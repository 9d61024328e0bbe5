//! Property-based checks over the sampling, strategy and metric layers.

use std::collections::HashSet;

use proptest::prelude::*;

use epshqs::design_space::{sample_uniform, DesignSpace, Sample, SampleStream};
use epshqs::metrics::hit_rate;
use epshqs::strategies::{eps_value, round_half_up, select_random, EpsSchedule, PoolSource};

fn bounds_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((-100.0f64..100.0, 0.1f64..50.0), 1..6)
        .prop_map(|v| v.into_iter().map(|(lo, span)| (lo, lo + span)).unzip())
}

proptest! {
    #[test]
    fn normalize_denormalize_round_trips(
        (lower, upper) in bounds_strategy(),
        seed in 0u64..1000,
    ) {
        let space = DesignSpace::from_bounds(lower, upper).unwrap();
        let mut stream = SampleStream::new(seed);
        let s = stream.draw(&space);
        let unit = space.normalize(&s).unwrap();
        prop_assert!(unit.iter().all(|&u| (0.0..=1.0).contains(&u)));
        let back = space.denormalize(&unit);
        for (a, b) in back.iter().zip(&s.coords) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn uniform_samples_stay_in_bounds(
        (lower, upper) in bounds_strategy(),
        n in 1usize..200,
        seed in 0u64..1000,
    ) {
        let space = DesignSpace::from_bounds(lower, upper).unwrap();
        let mut stream = SampleStream::new(seed);
        let pool = sample_uniform(&space, n, &mut stream);
        prop_assert_eq!(pool.len(), n);
        prop_assert!(pool.samples.iter().all(|s| space.contains(&s.coords)));
        // Ids unique within the stream.
        let ids: HashSet<u64> = pool.samples.iter().map(|s| s.id).collect();
        prop_assert_eq!(ids.len(), n);
    }

    #[test]
    fn random_selection_is_distinct_and_sized(
        n in 1usize..100,
        b_frac in 0.0f64..1.0,
        seed in 0u64..1000,
    ) {
        let b = 1 + (b_frac * (n - 1) as f64) as usize;
        let space = DesignSpace::unit(2);
        let mut stream = SampleStream::new(seed);
        let pool = sample_uniform(&space, n, &mut stream);
        let res = select_random(&PoolSource::Finite(&pool), b, &mut stream).unwrap();
        prop_assert_eq!(res.selected.len(), b);
        let ids: HashSet<u64> = res.selected.iter().map(|s| s.id).collect();
        prop_assert_eq!(ids.len(), b);
        let pool_ids: HashSet<u64> = pool.samples.iter().map(|s| s.id).collect();
        prop_assert!(ids.is_subset(&pool_ids));
    }

    #[test]
    fn log_schedule_is_increasing_and_capped(total in 2usize..500) {
        let sched = EpsSchedule::LogIncreasing { total_iters: total };
        let mut prev = 0.0;
        for t in 1..=total {
            let v = eps_value(sched, t).unwrap();
            prop_assert!(v > prev);
            prop_assert!(v <= 1.0);
            prev = v;
        }
        prop_assert!((prev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_half_up_splits_whole_batches(b in 1usize..200, eps in 0.0f64..=1.0) {
        let quota = round_half_up(eps * b as f64);
        prop_assert!(quota <= b);
        let rest = b - quota;
        prop_assert_eq!(quota + rest, b);
    }

    #[test]
    fn hit_rate_is_permutation_and_scale_invariant(
        pairs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..40),
        scale in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
        swap in prop::collection::vec(any::<prop::sample::Index>(), 0..10),
    ) {
        let (preds, targets): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let base = hit_rate(&preds, &targets, 0.05).unwrap();
        prop_assert!((0.0..=1.0).contains(&base));

        let scaled_p: Vec<f64> = preds.iter().map(|p| p * scale).collect();
        let scaled_t: Vec<f64> = targets.iter().map(|t| t * scale).collect();
        prop_assert_eq!(hit_rate(&scaled_p, &scaled_t, 0.05).unwrap(), base);

        let mut pp = preds.clone();
        let mut tt = targets.clone();
        for idx in swap {
            let i = idx.index(pp.len());
            pp.swap(0, i);
            tt.swap(0, i);
        }
        prop_assert_eq!(hit_rate(&pp, &tt, 0.05).unwrap(), base);
    }

    #[test]
    fn same_seed_same_draws(seed in any::<u64>(), n in 1usize..50) {
        let space = DesignSpace::from_bounds(vec![-3.0], vec![9.0]).unwrap();
        let mut a = SampleStream::new(seed);
        let mut b = SampleStream::new(seed);
        let pa: Vec<Sample> = (0..n).map(|_| a.draw(&space)).collect();
        let pb: Vec<Sample> = (0..n).map(|_| b.draw(&space)).collect();
        prop_assert_eq!(pa, pb);
    }
}
