//! Rule extraction from a clustering, cluster by cluster and level by level.
//!
//! For a cluster `c` with peculiar features `P`:
//!
//! * `A` = features of `P` with precision 1 and recall 1 (in every member of
//!   `c` and nowhere else);
//! * `B` = features of `P` with recall 1 but precision below 1;
//! * `E` = non-empty subsets of `B` contained in at least one member.
//!
//! Type I rules are `t → A∖{t}` for every `t ∈ A` (when `|A| ≥ 2`) and
//! `b → A` for every `b ∈ E` (when `A` is non-empty). Every such rule has
//! confidence 1 on the whole dataset: an object holding a recall-1 feature
//! lies in `c`, and every object of `c` holds all of `A`.
//!
//! Type II rules come from Apriori run on the cluster's members restricted to
//! `P`. All reported supports and confidences are measured on the full
//! dataset, not on the cluster's local view.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::apriori::{mine_rules, MiningParams};
use crate::dataset::{is_subset, BinaryDataset, FeatureId, WeightedDataset};
use crate::error::{Error, Result};
use crate::metrics::{rule_metrics, ClusterProfile, LevelProfiles};
use crate::multisom::GeneralizationHierarchy;
use crate::som::{ClusterAssignment, Neuron};

/// Default bound on `|B|` for enumerating `E` by full subset scan.
pub const DEFAULT_E_CAP: usize = 20;

/// Largest member ∩ B an object may have when `E` is built from members;
/// beyond this `E` itself has more than 2^24 elements.
const MAX_MEMBER_SUBSET: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleType {
    #[serde(rename = "I")]
    TypeI,
    #[serde(rename = "II")]
    TypeII,
}

impl fmt::Display for RuleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleType::TypeI => "I",
            RuleType::TypeII => "II",
        })
    }
}

impl std::str::FromStr for RuleType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(RuleType::TypeI),
            "II" => Ok(RuleType::TypeII),
            other => Err(Error::Param(format!("unknown rule type {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationRule {
    pub premise: Vec<FeatureId>,
    pub conclusion: Vec<FeatureId>,
    pub rule_type: RuleType,
    pub level: usize,
    pub cluster: Neuron,
    /// Objects of the full dataset holding premise ∪ conclusion.
    pub support_count: usize,
    pub support: f64,
    pub confidence: f64,
    /// An identical rule (sides and type) appears earlier in canonical order.
    pub duplicate: bool,
    /// Type II rule identical to a Type I rule of the same cluster.
    pub echoes_type1: bool,
}

impl AssociationRule {
    pub fn len(&self) -> usize {
        self.premise.len() + self.conclusion.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn sort_key(&self) -> (usize, Neuron, RuleType, &[FeatureId], &[FeatureId]) {
        (
            self.level,
            self.cluster,
            self.rule_type,
            &self.premise,
            &self.conclusion,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterRuleSets {
    pub a: Vec<FeatureId>,
    pub b: Vec<FeatureId>,
    pub e: Vec<Vec<FeatureId>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarcParams {
    /// Thresholds for the Apriori pass behind Type II rules.
    pub type2: MiningParams,
    /// `|B|` up to which `E` is found by scanning all subsets of `B`.
    pub e_cap: usize,
}

impl Default for MarcParams {
    fn default() -> Self {
        MarcParams {
            type2: MiningParams::default(),
            e_cap: DEFAULT_E_CAP,
        }
    }
}

impl From<MiningParams> for MarcParams {
    fn from(type2: MiningParams) -> Self {
        MarcParams {
            type2,
            ..MarcParams::default()
        }
    }
}

pub fn derive_rule_sets(
    c: &ClusterProfile,
    p_star: &[FeatureId],
    d: &BinaryDataset,
    e_cap: usize,
) -> Result<ClusterRuleSets> {
    if c.is_empty() {
        return Err(Error::Undefined(format!(
            "rule sets of empty cluster {}",
            c.neuron()
        )));
    }
    let mut sets = ClusterRuleSets::default();
    for &t in p_star {
        if c.recall(t)? != 1.0 {
            continue;
        }
        if c.precision(t)? == 1.0 {
            sets.a.push(t);
        } else {
            sets.b.push(t);
        }
    }
    sets.a.sort_unstable();
    sets.b.sort_unstable();
    sets.e = if sets.b.len() <= e_cap {
        realized_subsets_by_scan(&sets.b, c, d)
    } else {
        realized_subsets_by_members(&sets.b, c, d)?
    };
    Ok(sets)
}

/// Non-empty subsets of `b` held by some member, by testing all of them.
fn realized_subsets_by_scan(b: &[FeatureId], c: &ClusterProfile, d: &BinaryDataset) -> Vec<Vec<FeatureId>> {
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << b.len()) {
        let subset: Vec<FeatureId> = b
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &t)| t)
            .collect();
        if c.members().iter().any(|&o| is_subset(&subset, d.row(o))) {
            out.push(subset);
        }
    }
    sort_itemsets(&mut out);
    out
}

/// Same set, built as the union of the power sets of `member ∩ b`.
fn realized_subsets_by_members(
    b: &[FeatureId],
    c: &ClusterProfile,
    d: &BinaryDataset,
) -> Result<Vec<Vec<FeatureId>>> {
    let mut seen: HashSet<Vec<FeatureId>> = HashSet::new();
    for &o in c.members() {
        let inter: Vec<FeatureId> = d
            .row(o)
            .iter()
            .copied()
            .filter(|t| b.binary_search(t).is_ok())
            .collect();
        if inter.len() > MAX_MEMBER_SUBSET {
            return Err(Error::Bound(format!(
                "object holds {} recall-1 features of cluster {}; subset enumeration refused",
                inter.len(),
                c.neuron()
            )));
        }
        for mask in 1u64..(1u64 << inter.len()) {
            seen.insert(
                inter
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &t)| t)
                    .collect(),
            );
        }
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    sort_itemsets(&mut out);
    Ok(out)
}

fn sort_itemsets(sets: &mut [Vec<FeatureId>]) {
    sets.sort_by(|x, y| (x.len(), x).cmp(&(y.len(), y)));
}

/// Premise/conclusion pairs of the Type I rules, before annotation.
pub fn type1_sides(sets: &ClusterRuleSets) -> Vec<(Vec<FeatureId>, Vec<FeatureId>)> {
    let mut out = Vec::new();
    if sets.a.len() >= 2 {
        for &t in &sets.a {
            let rest = sets.a.iter().copied().filter(|&x| x != t).collect();
            out.push((vec![t], rest));
        }
    }
    if !sets.a.is_empty() {
        for b in &sets.e {
            out.push((b.clone(), sets.a.clone()));
        }
    }
    out
}

fn annotate(
    premise: Vec<FeatureId>,
    conclusion: Vec<FeatureId>,
    rule_type: RuleType,
    level: usize,
    cluster: Neuron,
    d: &BinaryDataset,
) -> Result<AssociationRule> {
    let m = rule_metrics(&premise, &conclusion, d)?;
    Ok(AssociationRule {
        premise,
        conclusion,
        rule_type,
        level,
        cluster,
        support_count: m.support_count,
        support: m.support,
        confidence: m.confidence,
        duplicate: false,
        echoes_type1: false,
    })
}

/// Type I rules of one cluster, measured on the full dataset `d`.
pub fn type1_rules(
    sets: &ClusterRuleSets,
    d: &BinaryDataset,
    level: usize,
    cluster: Neuron,
) -> Result<Vec<AssociationRule>> {
    type1_sides(sets)
        .into_iter()
        .map(|(p, q)| annotate(p, q, RuleType::TypeI, level, cluster, d))
        .collect()
}

/// Type II rules of one cluster: Apriori over the members restricted to the
/// peculiar features, then re-measured on the full dataset.
pub fn type2_rules(
    c: &ClusterProfile,
    p_star: &[FeatureId],
    params: &MiningParams,
    d: &BinaryDataset,
) -> Result<Vec<AssociationRule>> {
    if c.is_empty() {
        return Err(Error::Undefined(format!(
            "Type II rules of empty cluster {}",
            c.neuron()
        )));
    }
    let local = d.restrict(c.members(), p_star);
    mine_rules(&local, params)?
        .into_iter()
        .map(|r| annotate(r.premise, r.conclusion, RuleType::TypeII, c.level(), c.neuron(), d))
        .collect()
}

/// All rules of one cluster at one level.
pub fn cluster_rules(
    level: &LevelProfiles,
    index: usize,
    d: &BinaryDataset,
    params: &MarcParams,
) -> Result<Vec<AssociationRule>> {
    let c = level.cluster(index);
    if c.is_empty() {
        return Ok(Vec::new());
    }
    let p_star = level.peculiar_features(index);
    let sets = derive_rule_sets(c, &p_star, d, params.e_cap)?;
    let mut rules = type1_rules(&sets, d, c.level(), c.neuron())?;
    if let Some(bad) = rules.iter().find(|r| r.confidence != 1.0) {
        return Err(Error::Invariant(format!(
            "Type I rule with confidence {} at level {} cluster {}",
            bad.confidence,
            bad.level,
            bad.cluster
        )));
    }
    rules.extend(type2_rules(c, &p_star, &params.type2, d)?);
    Ok(rules)
}

/// Every rule found in a hierarchy, in canonical order: level, cluster
/// (row-major), type, premise, conclusion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleCollection {
    rules: Vec<AssociationRule>,
}

impl RuleCollection {
    /// Sorts into canonical order and recomputes the duplicate flags.
    pub fn from_rules(mut rules: Vec<AssociationRule>) -> Self {
        rules.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut seen: HashSet<(RuleType, Vec<FeatureId>, Vec<FeatureId>)> = HashSet::new();
        let mut type1_here: HashSet<(Vec<FeatureId>, Vec<FeatureId>)> = HashSet::new();
        let mut here = None;
        for r in &mut rules {
            if here != Some((r.level, r.cluster)) {
                here = Some((r.level, r.cluster));
                type1_here.clear();
            }
            r.duplicate = !seen.insert((r.rule_type, r.premise.clone(), r.conclusion.clone()));
            let sides = (r.premise.clone(), r.conclusion.clone());
            match r.rule_type {
                RuleType::TypeI => {
                    r.echoes_type1 = false;
                    type1_here.insert(sides);
                }
                RuleType::TypeII => r.echoes_type1 = type1_here.contains(&sides),
            }
        }
        RuleCollection { rules }
    }

    pub fn rules(&self) -> &[AssociationRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AssociationRule> {
        self.rules.iter()
    }

    pub fn of_type(&self, t: RuleType) -> impl Iterator<Item = &AssociationRule> {
        self.rules.iter().filter(move |r| r.rule_type == t)
    }

    pub fn at_level(&self, level: usize) -> impl Iterator<Item = &AssociationRule> {
        self.rules.iter().filter(move |r| r.level == level)
    }

    /// First occurrence of every distinct (type, premise, conclusion).
    pub fn deduplicated(&self) -> impl Iterator<Item = &AssociationRule> {
        self.rules.iter().filter(|r| !r.duplicate)
    }
}

impl IntoIterator for RuleCollection {
    type Item = AssociationRule;
    type IntoIter = std::vec::IntoIter<AssociationRule>;

    fn into_iter(self) -> Self::IntoIter {
        self.rules.into_iter()
    }
}

/// Runs the extraction over explicit per-level clusterings; the position in
/// `levels` is the level number.
pub fn mine_assignments<'a, I>(levels: I, d: &WeightedDataset, params: &MarcParams) -> Result<RuleCollection>
where
    I: IntoIterator<Item = &'a ClusterAssignment>,
{
    params.type2.validate()?;
    let binary = d.binarize();
    let mut rules = Vec::new();
    for (k, a) in levels.into_iter().enumerate() {
        let profiles = LevelProfiles::new(d, a, k)?;
        for idx in 0..profiles.num_clusters() {
            rules.extend(cluster_rules(&profiles, idx, &binary, params)?);
        }
    }
    Ok(RuleCollection::from_rules(rules))
}

/// Base map plus every generalization level.
pub fn mine(h: &GeneralizationHierarchy, d: &WeightedDataset, params: &MarcParams) -> Result<RuleCollection> {
    mine_assignments(h.assignments(), d, params)
}
