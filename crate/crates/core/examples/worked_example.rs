//! The five-object, two-cluster example: peculiar features, the A/B/E sets,
//! and every Type I and Type II rule of Cluster 1.
//!
//! cargo run -p marc-core --example worked_example

use marc_core::dataset::WeightedDataset;
use marc_core::marc::{derive_rule_sets, mine_assignments, MarcParams, DEFAULT_E_CAP};
use marc_core::metrics::LevelProfiles;
use marc_core::som::{ClusterAssignment, Neuron};

const FIVE_OBJECTS: &str = "\
object,t1,t2,t3,t4,t5,t6
d1,3,6,4,0,1,0
d2,5,7,6,0,0,2
d3,3,5,4,3,0,4
d4,0,0,0,0,6,7
d5,0,0,0,0,6,5
";

fn main() -> marc_core::Result<()> {
    let d = WeightedDataset::read_matrix_csv(FIVE_OBJECTS.as_bytes(), "five_objects")?;
    let (c1, c2) = (Neuron::new(0, 0), Neuron::new(0, 1));
    let clusters = ClusterAssignment::new(1, 2, vec![c1, c1, c1, c2, c2])?;

    let level = LevelProfiles::new(&d, &clusters, 0)?;
    let names = |ts: &[marc_core::dataset::FeatureId]| {
        ts.iter().map(|&t| d.feature_name(t)).collect::<Vec<_>>().join(", ")
    };
    for idx in 0..level.num_clusters() {
        let c = level.cluster(idx);
        let p_star = level.peculiar_features(idx);
        let sets = derive_rule_sets(c, &p_star, &d.binarize(), DEFAULT_E_CAP)?;
        println!("cluster {}: {} objects", c.neuron(), c.size());
        println!("  P* = {{{}}}", names(&p_star));
        println!("  A  = {{{}}}", names(&sets.a));
        println!("  B  = {{{}}}", names(&sets.b));
        let e: Vec<String> = sets.e.iter().map(|s| format!("{{{}}}", names(s))).collect();
        println!("  E  = {{{}}}", e.join(", "));
    }

    let rules = mine_assignments([&clusters], &d, &MarcParams::default())?;
    println!("\n{} rules", rules.len());
    for r in rules.iter() {
        println!(
            "  [{:>2}] {} -> {}  conf {:.3}  sup {}{}",
            r.rule_type.to_string(),
            names(&r.premise),
            names(&r.conclusion),
            r.confidence,
            r.support_count,
            if r.echoes_type1 { "  (also Type I)" } else { "" }
        );
    }
    Ok(())
}
