//! The whole pipeline on a planted corpus: train, generalize, mine, then
//! per-level statistics and the comparison against Apriori.
//!
//! cargo run -p marc-core --release --example synthetic_pipeline

use marc_core::apriori::MiningParams;
use marc_core::dataset::{SyntheticCorpus, SyntheticParams};
use marc_core::marc::{mine, MarcParams};
use marc_core::multisom::{build_hierarchy, default_levels};
use marc_core::report::{compare, hierarchy_level_stats, write_stats_csv};
use marc_core::som::{init_map, train, SomParams};

fn main() -> marc_core::Result<()> {
    let seed = 42;
    let corpus = SyntheticCorpus::generate(SyntheticParams::new(4, 100, 22, 0.02, seed))?;
    let d = &corpus.dataset;
    println!("{} objects × {} features, {} non-zero cells", d.num_objects(), d.num_features(), d.nnz());

    let p = SomParams::for_grid(8, 8, seed);
    let base = train(&init_map(8, 8, d, seed)?, d, &p)?;
    let h = build_hierarchy(&base, d, default_levels(8, 8))?;
    let rules = mine(&h, d, &MarcParams::default())?;
    println!("{} rules over {} levels\n", rules.len(), h.depth() + 1);

    write_stats_csv(std::io::stdout().lock(), &hierarchy_level_stats(&rules, &h))?;
    println!();
    print!("{}", compare(&rules, d, &MiningParams::new(2, 0.0))?);
    Ok(())
}
