//! Property-based invariants: grid partitioning, decision-rule consistency,
//! bound orderings and quantile round-trips on randomized inputs.

use hbr_core::chi2::{comparison_bounds, tail_upper_threshold, DeviationSpec};
use hbr_core::model::{candidate_windows, HbrParams, Observations};
use hbr_core::norm::{normal_cdf, normal_quantile};
use hbr_core::scan::{test_adaptive, test_homogeneous, test_known, TestOutcome};
use proptest::prelude::*;

fn check_consistency(out: &TestOutcome) {
    assert_eq!(out.reject, out.statistic > out.threshold);
    let max = out
        .per_window_values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(out.statistic, max);
    // argmax is the smallest index attaining the max
    let first = out
        .per_window_values
        .iter()
        .position(|&v| v == max)
        .unwrap()
        + 1;
    assert_eq!(out.argmax_window, first);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn windows_partition_every_admissible_grid(l in 1usize..48, extra in 0usize..4000) {
        let n = l + extra;
        let grid = candidate_windows(n, 1.0 / l as f64).unwrap();
        prop_assert_eq!(grid.len(), l);
        // exact cover of 1..=n in order, no gaps or overlaps
        let mut next = 1usize;
        for w in grid.windows() {
            prop_assert_eq!(w.start, next);
            prop_assert!(w.end >= w.start);
            next = w.end + 1;
            // membership rule: (j-1)/l < i/n <= j/l for every i in the window
            prop_assert!(w.start * l > n * (w.index - 1));
            prop_assert!(w.end * l <= n * w.index);
            prop_assert!((w.start - 1) * l <= n * (w.index - 1));
            if w.end < n {
                prop_assert!((w.end + 1) * l > n * w.index);
            }
        }
        prop_assert_eq!(next, n + 1);
        // sizes differ by at most one
        let sizes: Vec<usize> = grid.windows().iter().map(|w| w.len()).collect();
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
    }

    #[test]
    fn outcomes_are_internally_consistent(
        seed in any::<u64>(),
        l in 2usize..10,
        per in 2usize..12,
        delta in 0.0f64..2.0,
        kappa_sq in 0.05f64..2.0,
    ) {
        let n = l * per;
        let params = HbrParams::new(n, 1.0 / l as f64, delta, 1.0, kappa_sq, 0.05).unwrap();
        let obs = hbr_core::model::generate_h1(
            &params,
            (seed % l as u64) as usize + 1,
            hbr_core::rng::RngStream::new(seed, 0),
        ).unwrap();
        check_consistency(&test_known(&obs).unwrap());
        check_consistency(&test_adaptive(&obs).unwrap());
        check_consistency(&test_homogeneous(&obs).unwrap());
    }

    #[test]
    fn paper_bound_never_exceeds_rohde_dumbgen(
        b in prop::collection::vec(0.01f64..5.0, 1..4),
        d in prop::collection::vec(1u32..40, 1..4),
        a in prop::collection::vec(0.0f64..8.0, 1..4),
        x in 0.01f64..20.0,
    ) {
        let k = b.len().min(d.len()).min(a.len());
        let spec = DeviationSpec::from_parts(&b[..k], &d[..k], &a[..k]).unwrap();
        let paper = tail_upper_threshold(&spec, x).unwrap();
        let cb = comparison_bounds(&spec, x).unwrap();
        prop_assert_eq!(paper, cb.paper);
        prop_assert!(paper <= cb.rohde_dumbgen);
    }

    #[test]
    fn quantile_round_trip_on_random_p(p in 1e-10f64..=0.9999999) {
        let x = normal_quantile(p).unwrap();
        let back = normal_cdf(x);
        prop_assert!(((back - p) / p).abs() < 1e-9, "p={} back={}", p, back);
    }

    #[test]
    fn csv_round_trip_is_lossless(seed in any::<u64>(), l in 1usize..8, per in 1usize..20) {
        let n = l * per;
        let params = HbrParams::new(n.max(2), 1.0 / l as f64, 0.7, 2.0, 1.0, 0.05);
        prop_assume!(params.is_ok());
        let params = params.unwrap();
        let obs = hbr_core::model::generate_h0(&params, hbr_core::rng::RngStream::new(seed, 1));
        let mut buf = Vec::new();
        obs.write_csv(&mut buf).unwrap();
        let back = hbr_core::model::read_values_csv(std::io::BufReader::new(&buf[..])).unwrap();
        prop_assert_eq!(back, obs.values);
    }
}

#[test]
fn scale_invariance_of_known_test_decisions() {
    // (Y, delta, sigma0) -> (cY, c*delta, c*sigma0) leaves the decision alone
    let params = HbrParams::new(120, 0.25, 0.6, 1.0, 0.8, 0.05).unwrap();
    let obs = hbr_core::model::generate_h1(&params, 2, hbr_core::rng::RngStream::new(7, 7)).unwrap();
    let base = test_known(&obs).unwrap();
    for c in [0.5, 2.0, 13.0] {
        let scaled_params =
            HbrParams::new(120, 0.25, c * 0.6, c * c * 1.0, c * c * 0.8, 0.05).unwrap();
        let scaled = Observations {
            values: obs.values.iter().map(|v| c * v).collect(),
            params: scaled_params,
            true_window: obs.true_window,
        };
        let out = test_known(&scaled).unwrap();
        assert_eq!(out.reject, base.reject, "c={c}");
        assert_eq!(out.argmax_window, base.argmax_window, "c={c}");
        for (u, v) in base.per_window_values.iter().zip(&out.per_window_values) {
            assert!(((u - v) / u).abs() < 1e-11, "c={c}: {u} vs {v}");
        }
    }
}
