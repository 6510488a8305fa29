//! Trains a 6×6 map on a small planted corpus and shows how the groups
//! spread over the grid.
//!
//! cargo run -p marc-core --release --example train_som

use marc_core::dataset::{SyntheticCorpus, SyntheticParams};
use marc_core::som::{assign, init_map, train_with_observer, SomParams};

fn main() -> marc_core::Result<()> {
    let corpus = SyntheticCorpus::generate(SyntheticParams::new(3, 60, 14, 0.02, 1))?;
    let d = &corpus.dataset;
    let p = SomParams {
        epochs: 15,
        ..SomParams::for_grid(6, 6, 1)
    };
    let start = init_map(6, 6, d, p.seed)?;
    let trained = train_with_observer(&start, d, &p, |epoch, m| {
        let a = assign(m, d).expect("dimensions match");
        let used = a.clusters().iter().filter(|c| !c.is_empty()).count();
        println!("epoch {epoch:>2}: {used} neurons in use");
    })?;

    let a = assign(&trained, d)?;
    println!("\nmajority group per neuron ('.' = empty):");
    for r in 0..a.rows() {
        let row: String = (0..a.cols())
            .map(|c| {
                let members = a.members(marc_core::som::Neuron::new(r, c));
                let mut counts = [0usize; 3];
                for o in &members {
                    counts[corpus.object_group[o.0]] += 1;
                }
                match counts.iter().enumerate().max_by_key(|&(_, n)| n) {
                    Some((g, &n)) if n > 0 => char::from(b'A' + g as u8),
                    _ => '.',
                }
            })
            .collect();
        println!("  {row}");
    }
    Ok(())
}
