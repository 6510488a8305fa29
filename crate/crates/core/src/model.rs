//! Versioned JSON model file holding a trained map, its generalization
//! levels and every level's object assignment.
//!
//! Codebook entries are written with the shortest decimal form that parses
//! back to the same `f64`, so a reloaded model reproduces its assignments
//! exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::WeightedDataset;
use crate::error::{Error, Result};
use crate::multisom::{GeneralizationHierarchy, HierarchyLevel};
use crate::som::{ClusterAssignment, Distance, Neuron, SomMap, SomParams};

pub const FORMAT_NAME: &str = "marc-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct LevelRecord {
    level: usize,
    rows: usize,
    cols: usize,
    codebooks: Vec<Vec<f64>>,
    /// `[row, col]` per object, in dataset order.
    assignment: Vec<[usize; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelRecord {
    format: String,
    version: u32,
    distance: Distance,
    training: Option<SomParams>,
    feature_names: Vec<String>,
    object_names: Vec<String>,
    levels: Vec<LevelRecord>,
}

/// A trained hierarchy together with the vocabulary it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub hierarchy: GeneralizationHierarchy,
    pub feature_names: Vec<String>,
    pub object_names: Vec<String>,
    pub training: Option<SomParams>,
}

impl Model {
    pub fn new(hierarchy: GeneralizationHierarchy, d: &WeightedDataset, training: Option<SomParams>) -> Self {
        Model {
            hierarchy,
            feature_names: d.feature_names().to_vec(),
            object_names: d.object_names().to_vec(),
            training,
        }
    }

    /// Errors unless `d` has the vocabulary and objects the model was built on.
    pub fn check_dataset(&self, d: &WeightedDataset) -> Result<()> {
        if d.num_features() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                actual: d.num_features(),
            });
        }
        if d.feature_names() != self.feature_names.as_slice() {
            return Err(Error::Model("dataset features differ from the model's".into()));
        }
        if d.object_names() != self.object_names.as_slice() {
            return Err(Error::Model("dataset objects differ from the model's".into()));
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        let levels = self
            .hierarchy
            .levels()
            .iter()
            .map(|l| LevelRecord {
                level: l.level,
                rows: l.map.rows(),
                cols: l.map.cols(),
                codebooks: l.map.codebooks().to_vec(),
                assignment: l.assignment.labels().iter().map(|n| [n.row, n.col]).collect(),
            })
            .collect();
        let rec = ModelRecord {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            distance: self.hierarchy.base().distance(),
            training: self.training,
            feature_names: self.feature_names.clone(),
            object_names: self.object_names.clone(),
            levels,
        };
        serde_json::to_writer_pretty(&mut writer, &rec)
            .map_err(|e| Error::Model(format!("encode failed: {e}")))?;
        writeln!(writer).map_err(|e| Error::io("<model>", e))?;
        writer.flush().map_err(|e| Error::io("<model>", e))
    }

    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let rec: ModelRecord =
            serde_json::from_reader(reader).map_err(|e| Error::Model(format!("decode failed: {e}")))?;
        if rec.format != FORMAT_NAME {
            return Err(Error::Model(format!("unexpected format tag {:?}", rec.format)));
        }
        if rec.version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                rec.version
            )));
        }
        let mut levels = Vec::with_capacity(rec.levels.len());
        for l in rec.levels {
            let map = SomMap::from_codebooks(l.rows, l.cols, rec.distance, l.codebooks)?;
            if map.dim() != rec.feature_names.len() {
                return Err(Error::DimensionMismatch {
                    expected: rec.feature_names.len(),
                    actual: map.dim(),
                });
            }
            if l.assignment.len() != rec.object_names.len() {
                return Err(Error::Model(format!(
                    "level {} assigns {} objects, model lists {}",
                    l.level,
                    l.assignment.len(),
                    rec.object_names.len()
                )));
            }
            let labels = l.assignment.iter().map(|&[r, c]| Neuron::new(r, c)).collect();
            let assignment = ClusterAssignment::new(l.rows, l.cols, labels)?;
            levels.push(HierarchyLevel {
                level: l.level,
                map,
                assignment,
            });
        }
        Ok(Model {
            hierarchy: GeneralizationHierarchy::from_levels(levels)?,
            feature_names: rec.feature_names,
            object_names: rec.object_names,
            training: rec.training,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }
}
