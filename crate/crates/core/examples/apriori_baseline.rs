//! Plain Apriori on a transaction file, the symbolic baseline.
//!
//! cargo run -p marc-core --example apriori_baseline -- [path] [minsup]

use marc_core::apriori::{frequent_itemsets, mine_rules, MiningParams};
use marc_core::dataset::load_transactions;

fn main() -> marc_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/cluster1_local.txt").to_owned());
    let minsup = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);

    let d = load_transactions(&path)?;
    let b = d.binarize();
    let name = |t: &marc_core::dataset::FeatureId| d.feature_name(*t);

    println!("{} transactions, {} items, minsup {minsup}", b.num_objects(), b.num_features());
    for s in frequent_itemsets(&b, minsup) {
        let items: Vec<_> = s.items.iter().map(name).collect();
        println!("  {{{}}}  support {}", items.join(" "), s.support);
    }
    let rules = mine_rules(&b, &MiningParams::new(minsup, 0.0))?;
    println!("{} rules", rules.len());
    for r in &rules {
        let p: Vec<_> = r.premise.iter().map(name).collect();
        let q: Vec<_> = r.conclusion.iter().map(name).collect();
        println!("  {} -> {}  conf {:.3}", p.join(" "), q.join(" "), r.confidence);
    }
    Ok(())
}
