//! Builds the generalization levels above a 10×10 map and reports, per
//! level, the neuron count and how many clusters mix planted groups.
//!
//! cargo run -p marc-core --release --example generalization

use std::collections::BTreeSet;

use marc_core::dataset::{SyntheticCorpus, SyntheticParams};
use marc_core::multisom::{build_hierarchy, default_levels};
use marc_core::som::{init_map, train, SomParams};

fn main() -> marc_core::Result<()> {
    let corpus = SyntheticCorpus::generate(SyntheticParams::new(5, 120, 20, 0.0, 3))?;
    let d = &corpus.dataset;
    let base = train(&init_map(10, 10, d, 3)?, d, &SomParams::for_grid(10, 10, 3))?;
    let h = build_hierarchy(&base, d, default_levels(10, 10))?;

    println!("level  neurons  occupied  mixed");
    for level in h.levels() {
        let clusters = level.assignment.clusters();
        let occupied = clusters.iter().filter(|c| !c.is_empty()).count();
        let mixed = clusters
            .iter()
            .filter(|c| c.iter().map(|o| corpus.object_group[o.0]).collect::<BTreeSet<_>>().len() > 1)
            .count();
        println!("{:>5}  {:>7}  {:>8}  {:>5}", level.level, level.map.num_neurons(), occupied, mixed);
    }
    Ok(())
}
