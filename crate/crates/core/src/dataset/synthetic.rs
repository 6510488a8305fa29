//! Planted-structure corpus generator.
//!
//! Each of `k_groups` groups owns a contiguous block of `features_per_group`
//! features. The first [`CORE_SIZE`] of them are the group core, carried by
//! every object of the group. The rest are split into small topics of about
//! [`TOPIC_SIZE`] features; every object is given one topic (round-robin)
//! and carries all of its features. Present in-group cells get a random
//! weight in `1..=MAX_WEIGHT`. Off-group cells are switched on with
//! probability `noise` (weight 1), except for core features and the first
//! [`SIGNATURE_SIZE`] features of each topic, which never appear outside
//! their group. Those keep a recall of 1 for any cluster holding all their
//! objects, which is what lets threshold-free rules survive the noise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{FeatureId, WeightedDataset};
use crate::error::{Error, Result};

pub const CORE_SIZE: usize = 2;
pub const TOPIC_SIZE: usize = 4;
pub const SIGNATURE_SIZE: usize = 2;
pub const MAX_WEIGHT: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticParams {
    pub k_groups: usize,
    pub objects_per_group: usize,
    pub features_per_group: usize,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticParams {
    pub fn new(
        k_groups: usize,
        objects_per_group: usize,
        features_per_group: usize,
        noise: f64,
        seed: u64,
    ) -> Self {
        SyntheticParams {
            k_groups,
            objects_per_group,
            features_per_group,
            noise,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k_groups == 0 || self.objects_per_group == 0 || self.features_per_group == 0 {
            return Err(Error::Param(format!(
                "group, object and feature counts must be positive (got {}, {}, {})",
                self.k_groups, self.objects_per_group, self.features_per_group
            )));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(Error::Param(format!(
                "noise must lie in [0, 1), got {}",
                self.noise
            )));
        }
        Ok(())
    }

    /// Core features per group.
    pub fn core_size(&self) -> usize {
        self.features_per_group.min(CORE_SIZE)
    }

    /// Sizes of the topics following the core; they sum to
    /// `features_per_group - core_size()` and differ by at most one.
    pub fn topic_sizes(&self) -> Vec<usize> {
        let f = self.features_per_group - self.core_size();
        if f == 0 {
            return Vec::new();
        }
        let n = (f / TOPIC_SIZE).max(1);
        (0..n).map(|i| f / n + usize::from(i < f % n)).collect()
    }
}

/// A generated corpus together with its planted labels.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub dataset: WeightedDataset,
    pub params: SyntheticParams,
    /// Group of every object.
    pub object_group: Vec<usize>,
    /// Topic (within its group) of every object.
    pub object_topic: Vec<usize>,
    /// Group owning every feature.
    pub feature_group: Vec<usize>,
}

impl SyntheticCorpus {
    pub fn generate(params: SyntheticParams) -> Result<Self> {
        params.validate()?;
        let SyntheticParams {
            k_groups,
            objects_per_group,
            features_per_group,
            noise,
            seed,
        } = params;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let core = params.core_size();
        let sizes = params.topic_sizes();
        // per topic, its range of positions within a group
        let mut topics = Vec::with_capacity(sizes.len());
        let mut acc = core;
        for &s in &sizes {
            topics.push(acc..acc + s);
            acc += s;
        }
        // positions within a group that noise may touch
        let mut noisy = vec![false; features_per_group];
        for r in &topics {
            noisy[r.start + SIGNATURE_SIZE.min(r.len())..r.end].fill(true);
        }

        let num_features = k_groups * features_per_group;
        let feature_group: Vec<usize> = (0..num_features).map(|t| t / features_per_group).collect();
        let feature_names = (0..num_features)
            .map(|t| format!("g{}f{:02}", t / features_per_group, t % features_per_group))
            .collect();

        let mut object_names = Vec::with_capacity(k_groups * objects_per_group);
        let mut object_group = Vec::with_capacity(k_groups * objects_per_group);
        let mut object_topic = Vec::with_capacity(k_groups * objects_per_group);
        let mut rows = Vec::with_capacity(k_groups * objects_per_group);
        for g in 0..k_groups {
            for i in 0..objects_per_group {
                let topic = i % topics.len().max(1);
                let own = topics.get(topic).cloned().unwrap_or(0..0);
                let mut row = Vec::new();
                for t in 0..num_features {
                    let group = t / features_per_group;
                    let local = t % features_per_group;
                    if group == g {
                        if local < core || own.contains(&local) {
                            let w = rng.random_range(1..=MAX_WEIGHT);
                            row.push((FeatureId(t), f64::from(w)));
                        }
                    } else if noise > 0.0 && noisy[local] && rng.random_bool(noise) {
                        row.push((FeatureId(t), 1.0));
                    }
                }
                object_names.push(format!("g{g}o{i:04}"));
                object_group.push(g);
                object_topic.push(topic);
                rows.push(row);
            }
        }

        Ok(SyntheticCorpus {
            dataset: WeightedDataset::from_sparse(object_names, feature_names, rows)?,
            params,
            object_group,
            object_topic,
            feature_group,
        })
    }
}

pub fn generate_synthetic(
    k_groups: usize,
    objects_per_group: usize,
    features_per_group: usize,
    noise: f64,
    seed: u64,
) -> Result<WeightedDataset> {
    let params = SyntheticParams::new(k_groups, objects_per_group, features_per_group, noise, seed);
    Ok(SyntheticCorpus::generate(params)?.dataset)
}
