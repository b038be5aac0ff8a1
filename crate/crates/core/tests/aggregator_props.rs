mod common;

use common::brute;
use parsgd::aggregators::{
    aggregate_krum, aggregate_parsgd, aggregate_trimmed_mean, compute_f, parsgd_select, AggregationRule,
    OpCounter, SelectionMode,
};
use parsgd::stats::{absolute_skewness, coordinate_wise_median, GradientVector};
use proptest::prelude::*;

fn to_gv(vs: &[Vec<f64>]) -> Vec<GradientVector> {
    vs.iter().map(|v| GradientVector::new(v.clone()).unwrap()).collect()
}

/// Small integer-valued sets so that ties are common.
fn tied_sets(max_m: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_m, 1..=max_d).prop_flat_map(|(m, d)| {
        prop::collection::vec(prop::collection::vec((-6i32..=6).prop_map(f64::from), d), m)
    })
}

fn real_sets(max_m: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_m, 1..=max_d).prop_flat_map(|(m, d)| {
        prop::collection::vec(prop::collection::vec(-1e3..1e3f64, d), m)
    })
}

fn either_sets(max_m: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop_oneof![tied_sets(max_m, max_d), real_sets(max_m, max_d)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn median_matches_sorting(vs in either_sets(31, 8)) {
        let got = coordinate_wise_median(&to_gv(&vs)).unwrap();
        prop_assert_eq!(got.into_vec(), brute::coordinate_median(&vs));
    }

    #[test]
    fn median_is_permutation_invariant(vs in real_sets(31, 4), seed in any::<u64>()) {
        let mut shuffled = vs.clone();
        use rand::{seq::SliceRandom, SeedableRng};
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(
            coordinate_wise_median(&to_gv(&vs)).unwrap(),
            coordinate_wise_median(&to_gv(&shuffled)).unwrap()
        );
    }

    #[test]
    fn median_translates(vs in tied_sets(31, 4), shift in -100i32..100) {
        let c = f64::from(shift);
        let moved: Vec<Vec<f64>> = vs.iter().map(|v| v.iter().map(|x| x + c).collect()).collect();
        let a = coordinate_wise_median(&to_gv(&vs)).unwrap();
        let b = coordinate_wise_median(&to_gv(&moved)).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert_eq!(x + c, *y);
        }
    }

    #[test]
    fn median_stays_in_range(vs in real_sets(31, 4)) {
        let g = coordinate_wise_median(&to_gv(&vs)).unwrap();
        for k in 0..g.dim() {
            let col = brute::column(&vs, k);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= g[k] && g[k] <= hi);
        }
    }

    #[test]
    fn trimmed_mean_matches_sorting(vs in either_sets(15, 6), beta in 0.0..0.49f64) {
        let m = vs.len();
        let t = (beta * m as f64).floor() as usize;
        prop_assume!(m > 2 * t);
        let got = aggregate_trimmed_mean(&to_gv(&vs), beta).unwrap();
        prop_assert_eq!(got.into_vec(), brute::trimmed_mean(&vs, beta));
    }

    #[test]
    fn krum_matches_exhaustive(vs in either_sets(15, 6), f in 0usize..6) {
        prop_assume!(vs.len() >= f + 3);
        let got = aggregate_krum(&to_gv(&vs), f, 1).unwrap();
        prop_assert_eq!(got.into_vec(), vs[brute::krum(&vs, f)].clone());
    }

    #[test]
    fn parsgd_selection_matches_exhaustive(vs in either_sets(15, 6), frac in 0.0..1.0f64) {
        let f = ((vs.len() - 1) as f64 * frac) as usize;
        let sel = parsgd_select(&to_gv(&vs), f, SelectionMode::PerCoordinate).unwrap();
        let (g, chosen) = brute::parsgd_per_coordinate(&vs, f);
        prop_assert_eq!(sel.median.as_slice(), &g[..]);
        for (k, ids) in chosen.iter().enumerate() {
            prop_assert_eq!(sel.neighbour_indices(k), &ids[..]);
        }
        let est = aggregate_parsgd(&to_gv(&vs), f, SelectionMode::PerCoordinate).unwrap();
        prop_assert_eq!(est.into_vec(), brute::parsgd_estimate(&vs, f));

        let sel = parsgd_select(&to_gv(&vs), f, SelectionMode::PerVector).unwrap();
        let (g, ids) = brute::parsgd_per_vector(&vs, f);
        prop_assert_eq!(sel.median.as_slice(), &g[..]);
        prop_assert_eq!(sel.neighbour_vectors().unwrap(), &ids[..]);
    }

    #[test]
    fn parsgd_with_zero_f_is_the_median(vs in either_sets(31, 6)) {
        let g = coordinate_wise_median(&to_gv(&vs)).unwrap();
        for mode in [SelectionMode::PerCoordinate, SelectionMode::PerVector] {
            prop_assert_eq!(aggregate_parsgd(&to_gv(&vs), 0, mode).unwrap(), g.clone());
        }
    }

    #[test]
    fn parsgd_is_permutation_invariant(vs in either_sets(21, 4), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut shuffled = vs.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let f = compute_f(vs.len());
        for mode in [SelectionMode::PerCoordinate, SelectionMode::PerVector] {
            prop_assert_eq!(
                aggregate_parsgd(&to_gv(&vs), f, mode).unwrap(),
                aggregate_parsgd(&to_gv(&shuffled), f, mode).unwrap()
            );
        }
    }

    #[test]
    fn parsgd_translates(vs in tied_sets(21, 4), shift in -50i32..50) {
        let c = f64::from(shift);
        let moved: Vec<Vec<f64>> = vs.iter().map(|v| v.iter().map(|x| x + c).collect()).collect();
        let f = compute_f(vs.len());
        for mode in [SelectionMode::PerCoordinate, SelectionMode::PerVector] {
            let a = aggregate_parsgd(&to_gv(&vs), f, mode).unwrap();
            let b = aggregate_parsgd(&to_gv(&moved), f, mode).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert!((x + c - y).abs() <= 1e-9 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn parsgd_stays_in_hull(vs in real_sets(31, 4), frac in 0.0..1.0f64) {
        let f = ((vs.len() - 1) as f64 * frac) as usize;
        for mode in [SelectionMode::PerCoordinate, SelectionMode::PerVector] {
            let u = aggregate_parsgd(&to_gv(&vs), f, mode).unwrap();
            for k in 0..u.dim() {
                let col = brute::column(&vs, k);
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(lo - 1e-9 <= u[k] && u[k] <= hi + 1e-9);
            }
        }
    }

    #[test]
    fn parsgd_never_counts_pairwise_distances(vs in real_sets(31, 4)) {
        for mode in [SelectionMode::PerCoordinate, SelectionMode::PerVector] {
            let rule = AggregationRule::ParSgd { selection: mode };
            let mut ops = OpCounter::default();
            rule.aggregate_counted(&to_gv(&vs), compute_f(vs.len()), &mut ops).unwrap();
            prop_assert_eq!(ops.pairwise_vector_distances, 0);
        }
    }

    #[test]
    fn skewness_is_antisymmetric(xs in prop::collection::vec(-100.0..100.0f64, 3..40)) {
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        match (absolute_skewness(&xs), absolute_skewness(&neg)) {
            (Ok(a), Ok(b)) => prop_assert!((a + b).abs() <= 1e-9 * (1.0 + a.abs())),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }
}

#[test]
fn spec_style_selection_example() {
    let vs = to_gv(&[vec![0.9], vec![1.0], vec![1.1], vec![10.0], vec![-10.0]]);
    let sel = parsgd_select(&vs, 2, SelectionMode::PerCoordinate).unwrap();
    let mut members = sel.members_at(0);
    members.sort_by(f64::total_cmp);
    assert_eq!(members, vec![0.9, 1.0, 1.1]);
}
