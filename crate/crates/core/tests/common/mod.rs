#![allow(dead_code)]

use std::path::PathBuf;

use marc_core::dataset::{FeatureId, WeightedDataset};
use marc_core::som::{ClusterAssignment, Neuron};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn five_objects() -> WeightedDataset {
    WeightedDataset::load_matrix_csv(fixture("five_objects.csv")).unwrap()
}

/// `{d1, d2, d3}` on neuron (0,0), `{d4, d5}` on (0,1).
pub fn five_object_clusters(d: &WeightedDataset) -> ClusterAssignment {
    ClusterAssignment::load_csv(fixture("five_objects_clusters.csv"), d).unwrap()
}

pub fn features(d: &WeightedDataset, names: &[&str]) -> Vec<FeatureId> {
    names.iter().map(|n| d.feature_id(n).unwrap()).collect()
}

pub fn names(d: &WeightedDataset, ids: &[FeatureId]) -> Vec<String> {
    ids.iter().map(|&t| d.feature_name(t).to_owned()).collect()
}

pub fn cluster1() -> Neuron {
    Neuron::new(0, 0)
}

/// Runs the CLI in-process and returns its exit code.
pub fn marc(args: &[&str]) -> i32 {
    marc_core::cli::run(std::iter::once("marc").chain(args.iter().copied()))
}
