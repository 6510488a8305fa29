mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use marc_core::apriori::{brute_force_frequent, frequent_itemsets, generate_rules, mine_rules, MiningParams};
use marc_core::dataset::{BinaryDataset, FeatureId, ObjectId, WeightedDataset};
use marc_core::marc::{derive_rule_sets, mine_assignments, MarcParams, RuleType};
use marc_core::metrics::{rule_metrics, LevelProfiles};
use marc_core::multisom::generalize_once;
use marc_core::report::{level_stats, read_stats_csv, write_stats_csv};
use marc_core::rule_io::{read_rules, write_rules, RuleFormat};
use marc_core::som::{ClusterAssignment, Distance, Neuron, SomMap};

/// Dense weight matrix with entries in 0..=4; a zero is an absent cell.
fn weights(max_objects: usize, max_features: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    (1..=max_objects, 1..=max_features)
        .prop_flat_map(|(n, f)| prop::collection::vec(prop::collection::vec(0u8..=4, f), n))
}

fn dataset(w: &[Vec<u8>]) -> WeightedDataset {
    let f = w[0].len();
    WeightedDataset::from_dense(
        (0..w.len()).map(|i| format!("o{i}")).collect(),
        (0..f).map(|t| format!("t{t}")).collect(),
        w.iter().map(|r| r.iter().map(|&x| f64::from(x)).collect()).collect(),
    )
    .unwrap()
}

/// Dataset plus a clustering of its objects on a grid of up to 3×3 neurons.
fn clustered(max_objects: usize, max_features: usize) -> impl Strategy<Value = (WeightedDataset, ClusterAssignment)> {
    (weights(max_objects, max_features), 1usize..=3, 1usize..=3).prop_flat_map(|(w, rows, cols)| {
        let n = w.len();
        prop::collection::vec((0..rows, 0..cols), n).prop_map(move |cells| {
            let labels = cells.iter().map(|&(r, c)| Neuron::new(r, c)).collect();
            (dataset(&w), ClusterAssignment::new(rows, cols, labels).unwrap())
        })
    })
}

fn binary(max_objects: usize, max_features: usize) -> impl Strategy<Value = BinaryDataset> {
    weights(max_objects, max_features).prop_map(|w| dataset(&w).binarize())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cluster_counts_partition_feature_counts((d, a) in clustered(25, 8)) {
        let level = LevelProfiles::new(&d, &a, 0).unwrap();
        for t in (0..d.num_features()).map(FeatureId) {
            let total = level.clusters()[0].total_count(t);
            prop_assert_eq!(level.clusters().iter().map(|c| c.count(t)).sum::<usize>(), total);
            if total > 0 {
                let share: f64 = level.clusters().iter().map(|c| c.weight_share(t).unwrap()).sum();
                prop_assert!((share - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn precision_recall_in_unit_interval((d, a) in clustered(25, 8)) {
        let level = LevelProfiles::new(&d, &a, 0).unwrap();
        for c in level.clusters().iter().filter(|c| !c.is_empty()) {
            for t in (0..d.num_features()).map(FeatureId) {
                let p = c.precision(t).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
                if let Ok(r) = c.recall(t) {
                    prop_assert!((0.0..=1.0).contains(&r));
                }
            }
        }
    }

    #[test]
    fn peculiar_share_exceeds_uniform((d, a) in clustered(25, 8)) {
        let level = LevelProfiles::new(&d, &a, 0).unwrap();
        let k = level.num_clusters() as f64;
        for idx in 0..level.num_clusters() {
            let c = level.cluster(idx);
            let p_star = level.peculiar_features(idx);
            for t in (0..d.num_features()).map(FeatureId) {
                let peculiar = c.weight(t) > 0.0 && c.weight_share(t).unwrap() * k > 1.0;
                prop_assert_eq!(p_star.contains(&t), peculiar);
            }
        }
    }

    #[test]
    fn rule_sets_follow_their_definitions((d, a) in clustered(20, 8)) {
        let level = LevelProfiles::new(&d, &a, 0).unwrap();
        let b = d.binarize();
        for idx in (0..level.num_clusters()).filter(|&i| !level.cluster(i).is_empty()) {
            let c = level.cluster(idx);
            let p_star = level.peculiar_features(idx);
            let sets = derive_rule_sets(c, &p_star, &b, 20).unwrap();
            for &t in &sets.a {
                prop_assert!(p_star.contains(&t));
                prop_assert_eq!(c.precision(t).unwrap(), 1.0);
                prop_assert_eq!(c.recall(t).unwrap(), 1.0);
            }
            for &t in &sets.b {
                prop_assert!(!sets.a.contains(&t));
            }
            for s in &sets.e {
                prop_assert!(!s.is_empty());
                prop_assert!(s.iter().all(|t| sets.b.contains(t)));
                // every object holding s belongs to the cluster
                let holders = b.support_count(s);
                let inside = c.members().iter().filter(|&&o| s.iter().all(|&t| b.contains(o, t))).count();
                prop_assert_eq!(holders, inside);
                prop_assert!(inside > 0);
            }
        }
    }

    #[test]
    fn type1_rules_are_exact((d, a) in clustered(30, 12)) {
        let rules = mine_assignments([&a], &d, &MarcParams::default()).unwrap();
        let b = d.binarize();
        for r in rules.of_type(RuleType::TypeI) {
            prop_assert_eq!(rule_metrics(&r.premise, &r.conclusion, &b).unwrap().confidence, 1.0);
        }
    }

    #[test]
    fn type2_rules_are_globally_frequent((d, a) in clustered(20, 8), minsup in 1usize..=3) {
        let params = MarcParams::from(MiningParams::new(minsup, 0.0));
        let rules = mine_assignments([&a], &d, &params).unwrap();
        let b = d.binarize();
        for r in rules.of_type(RuleType::TypeII) {
            let m = rule_metrics(&r.premise, &r.conclusion, &b).unwrap();
            prop_assert!(m.support_count >= minsup);
            prop_assert_eq!(m.confidence, r.confidence);
        }
    }

    #[test]
    fn apriori_matches_enumeration(d in binary(20, 10), minsup in 1usize..=3) {
        let got: BTreeSet<_> = frequent_itemsets(&d, minsup).into_iter().map(|s| (s.items, s.support)).collect();
        let want: BTreeSet<_> = brute_force_frequent(&d, minsup).unwrap().into_iter().map(|s| (s.items, s.support)).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn apriori_downward_closed(d in binary(20, 10), minsup in 1usize..=3) {
        let sets: BTreeSet<Vec<FeatureId>> = frequent_itemsets(&d, minsup).into_iter().map(|s| s.items).collect();
        for s in &sets {
            for skip in 0..s.len() {
                let sub: Vec<_> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &t)| t).collect();
                prop_assert!(sub.is_empty() || sets.contains(&sub));
            }
        }
    }

    #[test]
    fn rule_confidence_recomputes(d in binary(15, 8), minconf in 0.0f64..=1.0) {
        let rules = mine_rules(&d, &MiningParams::new(1, minconf)).unwrap();
        for r in &rules {
            let m = rule_metrics(&r.premise, &r.conclusion, &d).unwrap();
            prop_assert_eq!(m.confidence, r.confidence);
            prop_assert!(r.confidence >= minconf);
        }
        // with minconf 0 every frequent itemset of size k yields 2^k - 2 rules
        let all = generate_rules(&frequent_itemsets(&d, 1), 0.0);
        let expected: usize = frequent_itemsets(&d, 1).iter().map(|s| (1usize << s.items.len()) - 2).sum();
        prop_assert_eq!(all.len(), expected);
    }

    #[test]
    fn matrix_csv_roundtrip(w in weights(10, 6)) {
        let d = dataset(&w);
        let mut buf = Vec::new();
        d.write_matrix_csv(&mut buf).unwrap();
        prop_assert_eq!(WeightedDataset::read_matrix_csv(buf.as_slice(), "buf").unwrap(), d);
    }

    #[test]
    fn assignment_csv_roundtrip((d, a) in clustered(15, 3)) {
        let mut buf = Vec::new();
        a.write_csv(&mut buf, &d).unwrap();
        let back = ClusterAssignment::read_csv(buf.as_slice(), &d, Some((a.rows(), a.cols())), "buf").unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn rule_files_roundtrip((d, a) in clustered(15, 6), jsonl in any::<bool>()) {
        let rules = mine_assignments([&a, &a], &d, &MarcParams::default()).unwrap();
        let format = if jsonl { RuleFormat::Jsonl } else { RuleFormat::Csv };
        let mut buf = Vec::new();
        write_rules(&mut buf, &rules, d.feature_names(), format).unwrap();
        prop_assert_eq!(read_rules(buf.as_slice(), d.feature_names(), "buf").unwrap(), rules);
    }

    #[test]
    fn stats_csv_roundtrip((d, a) in clustered(15, 6)) {
        let rules = mine_assignments([&a], &d, &MarcParams::default()).unwrap();
        let stats = level_stats(&rules, &[a.num_clusters()]);
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &stats).unwrap();
        prop_assert_eq!(read_stats_csv(buf.as_slice(), "buf").unwrap(), stats);
    }

    #[test]
    fn generalization_is_linear(
        rows in 2usize..6,
        cols in 2usize..6,
        seed in prop::collection::vec(-10.0f64..10.0, 72),
        k in -3.0f64..3.0,
    ) {
        let n = rows * cols;
        let cb = |off: usize| (0..n).map(|i| vec![seed[(i + off) % 72], seed[(3 * i + off) % 72]]).collect::<Vec<_>>();
        let (x, y) = (cb(0), cb(7));
        let combo: Vec<Vec<f64>> = x.iter().zip(&y).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + k * q).collect()).collect();
        let g = |c: Vec<Vec<f64>>| generalize_once(&SomMap::from_codebooks(rows, cols, Distance::Euclidean, c).unwrap()).unwrap();
        let (gx, gy, gc) = (g(x), g(y), g(combo));
        prop_assert_eq!(gc.num_neurons(), (rows - 1) * (cols - 1));
        for i in 0..gc.num_neurons() {
            for j in 0..2 {
                let lin = gx.codebooks()[i][j] + k * gy.codebooks()[i][j];
                prop_assert!((gc.codebooks()[i][j] - lin).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn objects_outside_every_cluster_do_not_exist() {
    let d = common::five_objects();
    let a = common::five_object_clusters(&d);
    let total: usize = a.clusters().iter().map(Vec::len).sum();
    assert_eq!(total, d.num_objects());
    assert!(d.objects().all(|o| a.members(a.neuron(o)).contains(&ObjectId(o.0))));
}
