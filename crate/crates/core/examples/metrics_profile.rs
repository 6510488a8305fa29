//! Per-cluster precision, recall and weight share for a fixed clustering,
//! written as the long-format CSV the metrics module produces.
//!
//! cargo run -p marc-core --example metrics_profile

use marc_core::dataset::WeightedDataset;
use marc_core::metrics::{LevelProfiles, RecallBasis};
use marc_core::som::ClusterAssignment;

fn main() -> marc_core::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let d = WeightedDataset::load_matrix_csv(format!("{dir}/five_objects.csv"))?;
    let clusters = ClusterAssignment::load_csv(format!("{dir}/five_objects_clusters.csv"), &d)?;

    let level = LevelProfiles::new(&d, &clusters, 0)?;
    level.write_csv(std::io::stdout().lock(), &d)?;

    // Recall over the dataset size instead of the feature's own count:
    // no feature of Cluster 1 reaches 1, so there is nothing to build Type I
    // rules from.
    let literal = LevelProfiles::with_basis(&d, &clusters, 0, RecallBasis::DatasetSize)?;
    let c = literal.cluster(0);
    println!();
    for t in c.present_features() {
        println!("{}: recall over N = {:.2}", d.feature_name(t), c.recall(t)?);
    }
    Ok(())
}
