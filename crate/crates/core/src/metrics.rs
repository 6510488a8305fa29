//! Rule and cluster quality measures.
//!
//! Cluster measures for a cluster `c` and feature `t`:
//!
//! * precision  = `N_c^t / |c|`, the share of the cluster's objects holding `t`;
//! * recall     = `N_c^t / N^t`, the share of all objects holding `t` that sit
//!   in `c` (recall 1 means `t` occurs nowhere else);
//! * weight share `W_c^t` = the cluster's part of the total weight of `t`;
//! * peculiar features = `{ t | W_c^t > 1/|C| }`, features for which the
//!   cluster holds strictly more than a uniform share of the weight, with
//!   `|C|` counting every cluster of the level, empty ones included.
//!
//! Rule measures are the usual support (fraction of objects holding both
//! sides) and confidence (support of both sides over support of the premise).

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use crate::dataset::{is_subset, BinaryDataset, FeatureId, ObjectId, WeightedDataset};
use crate::error::{Error, Result};
use crate::som::{ClusterAssignment, Neuron};

/// Denominator used for cluster recall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecallBasis {
    /// `N^t`, the number of objects in the whole dataset containing the feature.
    #[default]
    FeatureOccurrences,
    /// `N`, the number of objects in the dataset. Kept only to show that this
    /// reading cannot produce perfect-recall features; never use it for mining.
    DatasetSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureStats {
    /// Objects holding the feature.
    pub count: usize,
    /// Sum of the feature's weights over those objects.
    pub weight: f64,
}

#[derive(Debug)]
struct FeatureTotals {
    num_objects: usize,
    stats: Vec<FeatureStats>,
}

/// Per-cluster occurrence counts and weights, plus the dataset totals needed
/// for recall and weight shares.
#[derive(Debug, Clone)]
pub struct ClusterProfile {
    level: usize,
    neuron: Neuron,
    members: Vec<ObjectId>,
    features: BTreeMap<FeatureId, FeatureStats>,
    totals: Arc<FeatureTotals>,
    basis: RecallBasis,
}

impl ClusterProfile {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn neuron(&self) -> Neuron {
        self.neuron
    }

    /// `D_c`, in ascending object order.
    pub fn members(&self) -> &[ObjectId] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Features held by at least one member, ascending.
    pub fn present_features(&self) -> impl Iterator<Item = FeatureId> + '_ {
        self.features.keys().copied()
    }

    /// `N_c^t`.
    pub fn count(&self, t: FeatureId) -> usize {
        self.features.get(&t).map_or(0, |s| s.count)
    }

    pub fn weight(&self, t: FeatureId) -> f64 {
        self.features.get(&t).map_or(0.0, |s| s.weight)
    }

    /// `N^t` over the whole dataset.
    pub fn total_count(&self, t: FeatureId) -> usize {
        self.totals.stats.get(t.0).map_or(0, |s| s.count)
    }

    pub fn total_weight(&self, t: FeatureId) -> f64 {
        self.totals.stats.get(t.0).map_or(0.0, |s| s.weight)
    }

    pub fn recall_basis(&self) -> RecallBasis {
        self.basis
    }

    pub fn precision(&self, t: FeatureId) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Undefined(format!(
                "precision of empty cluster {} at level {}",
                self.neuron, self.level
            )));
        }
        Ok(self.count(t) as f64 / self.size() as f64)
    }

    pub fn recall(&self, t: FeatureId) -> Result<f64> {
        let denom = match self.basis {
            RecallBasis::FeatureOccurrences => self.total_count(t),
            RecallBasis::DatasetSize => self.totals.num_objects,
        };
        if self.total_count(t) == 0 || denom == 0 {
            return Err(Error::Undefined(format!(
                "recall of feature {} which occurs in no object",
                t.0
            )));
        }
        Ok(self.count(t) as f64 / denom as f64)
    }

    /// `W_c^t`: this cluster's share of the feature's total weight.
    pub fn weight_share(&self, t: FeatureId) -> Result<f64> {
        let total = self.total_weight(t);
        if total <= 0.0 {
            return Err(Error::Undefined(format!(
                "weight share of feature {} with zero total weight",
                t.0
            )));
        }
        Ok(self.weight(t) / total)
    }
}

pub fn precision(c: &ClusterProfile, t: FeatureId) -> Result<f64> {
    c.precision(t)
}

pub fn recall(c: &ClusterProfile, t: FeatureId) -> Result<f64> {
    c.recall(t)
}

/// `W_c^t` with the denominator summed over the clusters of `level`.
pub fn feature_cluster_weight(
    c: &ClusterProfile,
    t: FeatureId,
    level: &LevelProfiles,
) -> Result<f64> {
    let total: f64 = level.clusters().iter().map(|p| p.weight(t)).sum();
    if total <= 0.0 {
        return Err(Error::Undefined(format!(
            "weight share of feature {} with zero total weight",
            t.0
        )));
    }
    Ok(c.weight(t) / total)
}

/// Peculiar features of `c` given the number of clusters at its level:
/// `W_c^t > 1/num_clusters`, evaluated as `weight · |C| > total` so that
/// exact ties are never counted.
pub fn peculiar_features(c: &ClusterProfile, num_clusters: usize) -> Vec<FeatureId> {
    let k = num_clusters as f64;
    c.features
        .iter()
        .filter(|(&t, s)| s.weight * k > c.total_weight(t))
        .map(|(&t, _)| t)
        .collect()
}

/// Profiles of every cluster (including empty ones) at one level, row-major.
#[derive(Debug, Clone)]
pub struct LevelProfiles {
    level: usize,
    profiles: Vec<ClusterProfile>,
}

impl LevelProfiles {
    pub fn new(d: &WeightedDataset, a: &ClusterAssignment, level: usize) -> Result<Self> {
        Self::with_basis(d, a, level, RecallBasis::default())
    }

    pub fn with_basis(
        d: &WeightedDataset,
        a: &ClusterAssignment,
        level: usize,
        basis: RecallBasis,
    ) -> Result<Self> {
        if a.num_objects() != d.num_objects() {
            return Err(Error::Dataset(format!(
                "assignment covers {} objects, dataset has {}",
                a.num_objects(),
                d.num_objects()
            )));
        }
        let mut stats = vec![FeatureStats::default(); d.num_features()];
        for o in d.objects() {
            for &(t, w) in d.row(o) {
                stats[t.0].count += 1;
                stats[t.0].weight += w;
            }
        }
        let totals = Arc::new(FeatureTotals {
            num_objects: d.num_objects(),
            stats,
        });

        let profiles = a
            .clusters()
            .into_iter()
            .enumerate()
            .map(|(idx, members)| {
                let mut features: BTreeMap<FeatureId, FeatureStats> = BTreeMap::new();
                for &o in &members {
                    for &(t, w) in d.row(o) {
                        let s = features.entry(t).or_default();
                        s.count += 1;
                        s.weight += w;
                    }
                }
                ClusterProfile {
                    level,
                    neuron: a.neuron_at(idx),
                    members,
                    features,
                    totals: Arc::clone(&totals),
                    basis,
                }
            })
            .collect();
        Ok(LevelProfiles { level, profiles })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `|C|`, empty clusters included.
    pub fn num_clusters(&self) -> usize {
        self.profiles.len()
    }

    pub fn clusters(&self) -> &[ClusterProfile] {
        &self.profiles
    }

    pub fn cluster(&self, index: usize) -> &ClusterProfile {
        &self.profiles[index]
    }

    pub fn peculiar_features(&self, index: usize) -> Vec<FeatureId> {
        peculiar_features(&self.profiles[index], self.num_clusters())
    }

    /// Writes `level,row,col,feature,n_c_t,w,precision,recall` for every
    /// feature present in every non-empty cluster.
    pub fn write_csv<W: Write>(&self, writer: W, d: &WeightedDataset) -> Result<()> {
        let err = |e: csv::Error| Error::Dataset(format!("csv write failed: {e}"));
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["level", "row", "col", "feature", "n_c_t", "w", "precision", "recall"])
            .map_err(err)?;
        for p in &self.profiles {
            for t in p.present_features() {
                w.write_record([
                    self.level.to_string(),
                    p.neuron.row.to_string(),
                    p.neuron.col.to_string(),
                    d.feature_name(t).to_owned(),
                    p.count(t).to_string(),
                    p.weight_share(t)?.to_string(),
                    p.precision(t)?.to_string(),
                    p.recall(t)?.to_string(),
                ])
                .map_err(err)?;
            }
        }
        w.flush().map_err(|e| Error::io("<profile csv>", e))
    }
}

/// Support and confidence of one rule, measured on a given dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleMetrics {
    /// Objects holding premise ∪ conclusion.
    pub support_count: usize,
    pub premise_count: usize,
    pub support: f64,
    pub confidence: f64,
}

fn check_sides(premise: &[FeatureId], conclusion: &[FeatureId]) -> Result<Vec<FeatureId>> {
    if premise.is_empty() || conclusion.is_empty() {
        return Err(Error::InvalidRule("premise and conclusion must be non-empty".into()));
    }
    let mut p = premise.to_vec();
    p.sort_unstable();
    p.dedup();
    let mut union = p.clone();
    for t in conclusion {
        if p.binary_search(t).is_ok() {
            return Err(Error::InvalidRule(format!(
                "feature {} on both sides of the rule",
                t.0
            )));
        }
        union.push(*t);
    }
    union.sort_unstable();
    union.dedup();
    Ok(union)
}

pub fn rule_support(
    premise: &[FeatureId],
    conclusion: &[FeatureId],
    d: &BinaryDataset,
) -> Result<f64> {
    let union = check_sides(premise, conclusion)?;
    if d.num_objects() == 0 {
        return Ok(0.0);
    }
    Ok(d.support_count(&union) as f64 / d.num_objects() as f64)
}

pub fn rule_confidence(
    premise: &[FeatureId],
    conclusion: &[FeatureId],
    d: &BinaryDataset,
) -> Result<f64> {
    Ok(rule_metrics(premise, conclusion, d)?.confidence)
}

/// Support and confidence in one pass over the dataset.
pub fn rule_metrics(
    premise: &[FeatureId],
    conclusion: &[FeatureId],
    d: &BinaryDataset,
) -> Result<RuleMetrics> {
    let union = check_sides(premise, conclusion)?;
    let mut p = premise.to_vec();
    p.sort_unstable();
    p.dedup();
    let (mut premise_count, mut support_count) = (0, 0);
    for row in d.rows() {
        if is_subset(&p, row) {
            premise_count += 1;
            if is_subset(&union, row) {
                support_count += 1;
            }
        }
    }
    if premise_count == 0 {
        return Err(Error::Undefined("confidence of a rule whose premise never occurs".into()));
    }
    Ok(RuleMetrics {
        support_count,
        premise_count,
        support: support_count as f64 / d.num_objects() as f64,
        confidence: support_count as f64 / premise_count as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::{ids, five_objects};

    fn five_objects_level() -> (WeightedDataset, LevelProfiles) {
        let d = five_objects();
        let a = fixture_assignment();
        let lp = LevelProfiles::new(&d, &a, 0).unwrap();
        (d, lp)
    }

    pub(crate) fn fixture_assignment() -> ClusterAssignment {
        let l = Neuron::new(0, 0);
        let r = Neuron::new(0, 1);
        ClusterAssignment::new(1, 2, vec![l, l, l, r, r]).unwrap()
    }

    const T: [FeatureId; 6] = [
        FeatureId(0),
        FeatureId(1),
        FeatureId(2),
        FeatureId(3),
        FeatureId(4),
        FeatureId(5),
    ];

    #[test]
    fn precision_examples() {
        let (_, lp) = five_objects_level();
        let (c1, c2) = (lp.cluster(0), lp.cluster(1));
        assert_eq!(precision(c1, T[0]).unwrap(), 1.0);
        assert_eq!(precision(c1, T[3]).unwrap(), 1.0 / 3.0);
        assert_eq!(precision(c2, T[4]).unwrap(), 1.0);
    }

    #[test]
    fn recall_examples() {
        let (_, lp) = five_objects_level();
        let c1 = lp.cluster(0);
        assert_eq!(recall(c1, T[3]).unwrap(), 1.0);
        assert_eq!(recall(c1, T[5]).unwrap(), 0.5);
        assert_eq!(recall(c1, T[0]).unwrap(), 1.0);
        assert_eq!(recall(lp.cluster(1), T[4]).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn literal_recall_denominator() {
        let d = five_objects();
        let lp = LevelProfiles::with_basis(&d, &fixture_assignment(), 0, RecallBasis::DatasetSize)
            .unwrap();
        assert_eq!(lp.cluster(0).recall(T[0]).unwrap(), 3.0 / 5.0);
    }

    #[test]
    fn weight_share_examples() {
        let (_, lp) = five_objects_level();
        let c1 = lp.cluster(0);
        assert!((feature_cluster_weight(c1, T[5], &lp).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(feature_cluster_weight(c1, T[0], &lp).unwrap(), 1.0);
        assert_eq!(c1.weight_share(T[0]).unwrap(), 1.0);

        let d = five_objects();
        let one = ClusterAssignment::new(1, 1, vec![Neuron::new(0, 0); 5]).unwrap();
        let single = LevelProfiles::new(&d, &one, 0).unwrap();
        for t in T {
            assert_eq!(feature_cluster_weight(single.cluster(0), t, &single).unwrap(), 1.0);
        }
    }

    #[test]
    fn peculiar_examples() {
        let (_, lp) = five_objects_level();
        assert_eq!(lp.peculiar_features(0), ids(&[0, 1, 2, 3]));
        assert_eq!(lp.peculiar_features(1), ids(&[4, 5]));
        let c2 = lp.cluster(1);
        assert_eq!(c2.weight_share(T[4]).unwrap(), 12.0 / 13.0);
        assert_eq!(c2.weight_share(T[5]).unwrap(), 12.0 / 18.0);
    }

    #[test]
    fn single_cluster_has_no_peculiar_features() {
        let d = five_objects();
        let one = ClusterAssignment::new(1, 1, vec![Neuron::new(0, 0); 5]).unwrap();
        let lp = LevelProfiles::new(&d, &one, 0).unwrap();
        assert!(lp.peculiar_features(0).is_empty());
    }

    #[test]
    fn empty_clusters_count_toward_threshold() {
        let d = five_objects();
        // 1x3 grid: third neuron empty, threshold becomes 1/3
        let l = Neuron::new(0, 0);
        let r = Neuron::new(0, 1);
        let a = ClusterAssignment::new(1, 3, vec![l, l, l, r, r]).unwrap();
        let lp = LevelProfiles::new(&d, &a, 0).unwrap();
        assert_eq!(lp.num_clusters(), 3);
        assert!(lp.cluster(2).is_empty());
        assert!(lp.cluster(2).precision(T[0]).is_err());
        // t6 share 1/3 is not strictly above 1/3
        assert_eq!(lp.peculiar_features(0), ids(&[0, 1, 2, 3]));
        assert!(lp.peculiar_features(2).is_empty());
    }

    #[test]
    fn undefined_recall_for_absent_feature() {
        let d = WeightedDataset::read_matrix_csv(",a,b\nx,1,0\n".as_bytes(), "t").unwrap();
        let a = ClusterAssignment::new(1, 1, vec![Neuron::new(0, 0)]).unwrap();
        let lp = LevelProfiles::new(&d, &a, 0).unwrap();
        assert!(lp.cluster(0).recall(FeatureId(1)).is_err());
        assert!(lp.cluster(0).weight_share(FeatureId(1)).is_err());
    }

    #[test]
    fn rule_measures_on_five_objects() {
        let b = five_objects().binarize();
        assert_eq!(rule_support(&ids(&[0]), &ids(&[1, 2]), &b).unwrap(), 0.6);
        assert_eq!(rule_support(&ids(&[3]), &ids(&[0, 1, 2]), &b).unwrap(), 0.2);
        assert_eq!(rule_confidence(&ids(&[0]), &ids(&[1, 2]), &b).unwrap(), 1.0);
        assert_eq!(rule_confidence(&ids(&[3]), &ids(&[0, 1, 2]), &b).unwrap(), 1.0);
        assert_eq!(rule_confidence(&ids(&[5]), &ids(&[4]), &b).unwrap(), 0.5);
        assert_eq!(rule_confidence(&ids(&[4]), &ids(&[5]), &b).unwrap(), 2.0 / 3.0);
        // t4 and t5 never co-occur
        assert_eq!(rule_support(&ids(&[3]), &ids(&[4]), &b).unwrap(), 0.0);
    }

    #[test]
    fn rule_measure_errors() {
        let b = five_objects().binarize();
        assert!(matches!(
            rule_support(&ids(&[0, 1]), &ids(&[1]), &b),
            Err(Error::InvalidRule(_))
        ));
        assert!(rule_support(&ids(&[]), &ids(&[1]), &b).is_err());
        let b2 = BinaryDataset::new(7, b.rows().to_vec()).unwrap();
        assert!(matches!(
            rule_confidence(&ids(&[6]), &ids(&[1]), &b2),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn profile_csv_lists_present_features() {
        let (d, lp) = five_objects_level();
        let mut buf = Vec::new();
        lp.write_csv(&mut buf, &d).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("level,row,col,feature,n_c_t,w,precision,recall\n"));
        assert!(text.contains("0,0,0,t4,1,1,0.3333333333333333,1\n"), "{text}");
        // 6 features present in cluster 1 (t1..t6 incl. t5 via d1), 2 in cluster 2
        assert_eq!(text.lines().count(), 1 + 6 + 2);
    }
}
