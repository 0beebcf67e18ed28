use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use nbk::modes::SearchOptions;
use nbk::pmf::TableOptions;
use nbk::sampler::batch_rng;
use nbk::{
    mode_search_to, mode_search_with, pmf_direct, pmf_table, pmf_table_with, sample_waiting_time,
    tail_mass, upper_bound, Arithmetic, ModeSet, Params,
};

fn params_strategy(max_k: u32, max_r: u32) -> impl Strategy<Value = Params> {
    (1..=max_k, 1..=max_r, 2i64..=12)
        .prop_flat_map(|(k, r, b)| (Just(k), Just(r), 1..b, Just(b)))
        .prop_map(|(k, r, a, b)| Params::from_ratio(k, r, a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_equals_recurrence(params in params_strategy(4, 4), extra in 0u64..16) {
        let n_max = params.support_min() + extra;
        let table = pmf_table(&params, n_max).unwrap();
        for n in params.support_min()..=n_max {
            let direct = pmf_direct(&params, n).unwrap();
            prop_assert_eq!(direct.as_exact().unwrap(), &table.exact(n));
        }
    }

    #[test]
    fn probabilities_are_a_subdistribution(params in params_strategy(5, 5), extra in 0u64..60) {
        let table = pmf_table(&params, params.support_min() + extra).unwrap();
        let mut total = BigRational::zero();
        for (_, p) in table.iter() {
            let p = p.as_exact().unwrap();
            prop_assert!(p.is_positive());
            total += p;
        }
        prop_assert!(total <= BigRational::one());
        let tail = tail_mass(&table);
        prop_assert_eq!(tail.as_exact().unwrap(), &(BigRational::one() - total));
    }

    #[test]
    fn modes_are_global_maximizers(params in params_strategy(4, 5)) {
        let result = mode_search_with(&params, SearchOptions::exact_only()).unwrap();
        let upper = upper_bound(&params);
        prop_assert!(result.modes.max() <= upper);
        prop_assert!(result.modes.min() >= params.support_min());
        let table = pmf_table(&params, upper + params.k() as u64).unwrap();
        let best = table.exact(result.modes.min());
        prop_assert_eq!(result.max_prob.as_exact().unwrap(), &best);
        for (n, p) in table.iter() {
            let p = p.as_exact().unwrap();
            prop_assert!(p <= &best);
            prop_assert_eq!(p == &best, result.modes.contains(n));
        }
    }

    #[test]
    fn certified_agrees_with_exact(params in params_strategy(5, 5)) {
        let forced = SearchOptions { exact_span_limit: 0, ..SearchOptions::default() };
        let ceiling = upper_bound(&params);
        let fast = mode_search_to(&params, ceiling, forced).unwrap();
        let exact = mode_search_to(&params, ceiling, SearchOptions::exact_only()).unwrap();
        prop_assert_eq!(fast.modes, exact.modes);
    }

    #[test]
    fn mode_set_text_round_trip(mut values in proptest::collection::vec(1u64..1_000_000, 1..6)) {
        values.sort_unstable();
        values.dedup();
        let set = ModeSet::new(values.clone());
        prop_assert_eq!(ModeSet::parse(&set.to_string()), Some(set));
    }

    #[test]
    fn samples_never_below_support(params in params_strategy(4, 4), seed in any::<u64>()) {
        let mut rng = batch_rng(seed, 0);
        for _ in 0..50 {
            prop_assert!(sample_waiting_time(&params, &mut rng).unwrap() >= params.support_min());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn log_path_within_tolerance(params in params_strategy(5, 5), len in 1u64..=10_000) {
        const REL_TOL: f64 = 1e-12;
        let n_max = params.support_min() + len - 1;
        let exact = pmf_table(&params, n_max).unwrap();
        let log = pmf_table_with(&params, n_max, TableOptions {
            arithmetic: Arithmetic::Log,
            ..TableOptions::default()
        }).unwrap();
        for ((n, e), (_, l)) in exact.iter().zip(log.iter()) {
            let (e, l) = (e.ln(), l.ln());
            // Past |ln P| = 2^14 half an ulp of the stored log already
            // exceeds the tolerance.
            if e.abs() >= 16384.0 {
                continue;
            }
            // The reference is itself rounded to the nearest f64.
            let slack = REL_TOL + f64::EPSILON / 2.0 * e.abs();
            prop_assert!((e - l).abs() <= slack, "n={} exact={} log={}", n, e, l);
        }
    }
}
