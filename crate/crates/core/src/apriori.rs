//! Level-wise Apriori frequent-itemset mining and rule generation.
//!
//! Candidates of size `k+1` come from joining two frequent `k`-itemsets that
//! share their first `k−1` items, and are pruned unless every `k`-subset is
//! frequent. Supports are counted by intersecting per-itemset object bitsets.

use std::collections::{HashMap, HashSet};

use crate::dataset::{BinaryDataset, FeatureId};
use crate::error::{Error, Result};

/// Largest feature count [`brute_force_frequent`] will enumerate.
pub const BRUTE_FORCE_MAX_FEATURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Itemset {
    /// Sorted ascending.
    pub items: Vec<FeatureId>,
    /// Absolute support count.
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiningParams {
    pub minsup_abs: usize,
    pub minconf: f64,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            minsup_abs: 2,
            minconf: 0.0,
        }
    }
}

impl MiningParams {
    pub fn new(minsup_abs: usize, minconf: f64) -> Self {
        MiningParams { minsup_abs, minconf }
    }

    /// Absolute threshold from a relative one, rounded up, never below 1.
    pub fn from_relative(minsup: f64, num_objects: usize, minconf: f64) -> Self {
        let abs = (minsup * num_objects as f64).ceil().max(1.0) as usize;
        MiningParams::new(abs, minconf)
    }

    pub fn validate(&self) -> Result<()> {
        if self.minsup_abs == 0 {
            return Err(Error::Param("minsup must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.minconf) {
            return Err(Error::Param(format!(
                "minconf must lie in [0, 1], got {}",
                self.minconf
            )));
        }
        Ok(())
    }
}

/// A rule read off frequent itemsets; counts are relative to the dataset the
/// itemsets were mined from.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicRule {
    pub premise: Vec<FeatureId>,
    pub conclusion: Vec<FeatureId>,
    pub support_count: usize,
    pub premise_count: usize,
    pub confidence: f64,
}

impl SymbolicRule {
    pub fn len(&self) -> usize {
        self.premise.len() + self.conclusion.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and_count(&self, other: &Bits) -> (Bits, usize) {
        let words: Vec<u64> = self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect();
        let count = words.iter().map(|w| w.count_ones() as usize).sum();
        (Bits(words), count)
    }
}

/// Every itemset with absolute support `≥ minsup_abs` (a threshold of 0 is
/// treated as 1). Output is ordered by size, then lexicographically.
pub fn frequent_itemsets(d: &BinaryDataset, minsup_abs: usize) -> Vec<Itemset> {
    let minsup = minsup_abs.max(1);
    let n = d.num_objects();

    let mut singles: Vec<(Bits, usize)> = (0..d.num_features()).map(|_| (Bits::zeros(n), 0)).collect();
    for (o, row) in d.rows().iter().enumerate() {
        for t in row {
            singles[t.0].0.set(o);
            singles[t.0].1 += 1;
        }
    }
    let mut level: Vec<(Vec<FeatureId>, Bits, usize)> = singles
        .into_iter()
        .enumerate()
        .filter(|(_, (_, c))| *c >= minsup)
        .map(|(t, (bits, c))| (vec![FeatureId(t)], bits, c))
        .collect();

    let mut out: Vec<Itemset> = level
        .iter()
        .map(|(items, _, c)| Itemset {
            items: items.clone(),
            support: *c,
        })
        .collect();

    while level.len() >= 2 {
        let k = level[0].0.len();
        let known: HashSet<&[FeatureId]> = level.iter().map(|(i, _, _)| i.as_slice()).collect();
        let mut next = Vec::new();
        for i in 0..level.len() {
            for j in i + 1..level.len() {
                let (a, b) = (&level[i].0, &level[j].0);
                if a[..k - 1] != b[..k - 1] {
                    break;
                }
                let mut cand = a.clone();
                cand.push(b[k - 1]);
                // the two parents are the subsets missing the last or the
                // second-to-last item; check the rest
                let mut sub = Vec::with_capacity(k);
                let all_frequent = (0..k - 1).all(|skip| {
                    sub.clear();
                    sub.extend(cand.iter().enumerate().filter(|&(p, _)| p != skip).map(|(_, t)| *t));
                    known.contains(sub.as_slice())
                });
                if !all_frequent {
                    continue;
                }
                let (bits, count) = level[i].1.and_count(&level[j].1);
                if count >= minsup {
                    next.push((cand, bits, count));
                }
            }
        }
        out.extend(next.iter().map(|(items, _, c)| Itemset {
            items: items.clone(),
            support: *c,
        }));
        level = next;
    }
    out
}

/// For every frequent itemset `F` with `|F| ≥ 2` and every non-empty proper
/// subset `S`, emits `S → F∖S` when `sup(F)/sup(S) ≥ minconf`. Rules are
/// sorted by premise, then conclusion.
pub fn generate_rules(frequents: &[Itemset], minconf: f64) -> Vec<SymbolicRule> {
    let support: HashMap<&[FeatureId], usize> = frequents
        .iter()
        .map(|f| (f.items.as_slice(), f.support))
        .collect();
    let mut rules = Vec::new();
    let mut premise = Vec::new();
    let mut conclusion = Vec::new();
    for f in frequents.iter().filter(|f| f.items.len() >= 2) {
        let k = f.items.len();
        assert!(k < 64, "itemset of size {k} is too large for rule generation");
        for mask in 1u64..(1 << k) - 1 {
            premise.clear();
            conclusion.clear();
            for (p, &t) in f.items.iter().enumerate() {
                if mask >> p & 1 == 1 {
                    premise.push(t);
                } else {
                    conclusion.push(t);
                }
            }
            let premise_count = *support
                .get(premise.as_slice())
                .expect("subset of a frequent itemset must be frequent");
            let confidence = f.support as f64 / premise_count as f64;
            if confidence >= minconf {
                rules.push(SymbolicRule {
                    premise: premise.clone(),
                    conclusion: conclusion.clone(),
                    support_count: f.support,
                    premise_count,
                    confidence,
                });
            }
        }
    }
    rules.sort_by(|a, b| (&a.premise, &a.conclusion).cmp(&(&b.premise, &b.conclusion)));
    rules
}

/// Frequent itemsets and their rules in one call.
pub fn mine_rules(d: &BinaryDataset, params: &MiningParams) -> Result<Vec<SymbolicRule>> {
    params.validate()?;
    Ok(generate_rules(
        &frequent_itemsets(d, params.minsup_abs),
        params.minconf,
    ))
}

/// Test oracle: enumerates all `2^F − 1` itemsets and counts each directly.
pub fn brute_force_frequent(d: &BinaryDataset, minsup_abs: usize) -> Result<Vec<Itemset>> {
    let f = d.num_features();
    if f > BRUTE_FORCE_MAX_FEATURES {
        return Err(Error::Bound(format!(
            "brute force needs at most {BRUTE_FORCE_MAX_FEATURES} features, dataset has {f}"
        )));
    }
    let minsup = minsup_abs.max(1);
    let mut out = Vec::new();
    for mask in 1u32..(1 << f) {
        let items: Vec<FeatureId> = (0..f).filter(|t| mask >> t & 1 == 1).map(FeatureId).collect();
        let support = d
            .rows()
            .iter()
            .filter(|row| items.iter().all(|t| row.contains(t)))
            .count();
        if support >= minsup {
            out.push(Itemset { items, support });
        }
    }
    out.sort_by(|a, b| (a.items.len(), &a.items).cmp(&(b.items.len(), &b.items)));
    Ok(out)
}
