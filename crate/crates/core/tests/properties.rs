mod common;

use proptest::prelude::*;

use chantopo::export::{from_json, lab_ramp, to_json, ABSENT_COLOR, PRESENT_COLOR};
use chantopo::fixture::random_projects;
use chantopo::ingest::Ecosystem;
use chantopo::knowledge::registry_default;
use chantopo::mapper::cluster_bin;
use chantopo::normalize::normalize_features;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bin_clusters_partition_the_points(
        pts in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 2), 0..40),
        bins in 2usize..20,
    ) {
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let clusters = cluster_bin(&refs, bins);
        let mut seen: Vec<usize> = clusters.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..pts.len()).collect::<Vec<_>>());
        for w in clusters.windows(2) {
            prop_assert!(w[0][0] < w[1][0]);
        }
        for c in &clusters {
            prop_assert!(c.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn normalized_features_stay_in_unit_range(n in 1usize..200, seed in any::<u64>()) {
        let reg = registry_default();
        let table = random_projects(n, &[Ecosystem::Go, Ecosystem::Maven], &[2016], seed).unwrap();
        let m = normalize_features(&table, &reg, &reg.names()).unwrap();
        prop_assert!(m.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn color_ramp_is_clamped(t in -2.0f64..3.0) {
        let c = lab_ramp(t);
        if t <= 0.0 {
            prop_assert_eq!(c, ABSENT_COLOR);
        }
        if t >= 1.0 {
            prop_assert_eq!(c, PRESENT_COLOR);
        }
    }

    #[test]
    fn graph_json_round_trips(
        members in prop::collection::vec(prop::collection::btree_set(0usize..30, 1..6), 1..10),
        value in 0.0f64..=1.0,
    ) {
        let m = common::matrix(vec![vec![value, 1.0 - value]; 30], &["Wiki", "License"], (0..30).collect());
        let g = common::graph(members.into_iter().map(|s| s.into_iter().collect()).collect(), &m);
        prop_assert_eq!(from_json(&to_json(&g)).unwrap(), g);
    }
}
