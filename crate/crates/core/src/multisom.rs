//! MultiSOM generalization: each level averages every 2×2 block of the level
//! below, shrinking an `i × j` grid to `(i−1) × (j−1)`. Objects are
//! re-assigned to each level by best-matching unit.

use crate::dataset::WeightedDataset;
use crate::error::{Error, Result};
use crate::som::{assign, ClusterAssignment, SomMap};

/// One level of the hierarchy. Level 0 is the base map.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyLevel {
    pub level: usize,
    pub map: SomMap,
    pub assignment: ClusterAssignment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizationHierarchy {
    levels: Vec<HierarchyLevel>,
}

impl GeneralizationHierarchy {
    /// Reassembles a hierarchy from stored levels (e.g. a model file),
    /// checking the grid arithmetic.
    pub fn from_levels(levels: Vec<HierarchyLevel>) -> Result<Self> {
        let Some(base) = levels.first() else {
            return Err(Error::Model("hierarchy has no levels".into()));
        };
        let (rows, cols) = (base.map.rows(), base.map.cols());
        for (k, lvl) in levels.iter().enumerate() {
            if lvl.level != k
                || lvl.map.rows() + k != rows
                || lvl.map.cols() + k != cols
                || lvl.assignment.rows() != lvl.map.rows()
                || lvl.assignment.cols() != lvl.map.cols()
                || lvl.assignment.num_objects() != base.assignment.num_objects()
            {
                return Err(Error::Model(format!(
                    "level {k} is inconsistent with a {rows}x{cols} base map"
                )));
            }
        }
        Ok(GeneralizationHierarchy { levels })
    }

    pub fn levels(&self) -> &[HierarchyLevel] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &HierarchyLevel {
        &self.levels[k]
    }

    pub fn base(&self) -> &SomMap {
        &self.levels[0].map
    }

    /// Number of generalization levels above the base.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn assignments(&self) -> impl Iterator<Item = &ClusterAssignment> {
        self.levels.iter().map(|l| &l.assignment)
    }

    pub fn neuron_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.map.num_neurons()).collect()
    }
}

/// One generalization step: neuron `(r, c)` of the output is the mean of
/// neurons `(r, c)`, `(r, c+1)`, `(r+1, c)` and `(r+1, c+1)` of `m`.
pub fn generalize_once(m: &SomMap) -> Result<SomMap> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows < 2 || cols < 2 {
        return Err(Error::NotReducible { rows, cols });
    }
    let cb = m.codebooks();
    let at = |r: usize, c: usize| &cb[r * cols + c];
    let mut out = Vec::with_capacity((rows - 1) * (cols - 1));
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            let (a, b, x, y) = (at(r, c), at(r, c + 1), at(r + 1, c), at(r + 1, c + 1));
            out.push(
                (0..m.dim())
                    .map(|k| 0.25 * (a[k] + b[k] + x[k] + y[k]))
                    .collect(),
            );
        }
    }
    SomMap::from_codebooks(rows - 1, cols - 1, m.distance(), out)
}

/// Largest number of generalization levels a `rows × cols` map supports.
pub fn max_levels(rows: usize, cols: usize) -> usize {
    rows.min(cols).saturating_sub(1)
}

/// Default depth: stop at the 2×2-reducible floor, i.e. `min(i, j) − 2`
/// levels (a 10×10 base ends at a 2×2 map).
pub fn default_levels(rows: usize, cols: usize) -> usize {
    rows.min(cols).saturating_sub(2)
}

pub fn build_hierarchy(
    base: &SomMap,
    d: &WeightedDataset,
    num_levels: usize,
) -> Result<GeneralizationHierarchy> {
    let max = max_levels(base.rows(), base.cols());
    if num_levels > max {
        return Err(Error::TooManyLevels {
            requested: num_levels,
            max,
        });
    }
    let mut levels = Vec::with_capacity(num_levels + 1);
    levels.push(HierarchyLevel {
        level: 0,
        map: base.clone(),
        assignment: assign(base, d)?,
    });
    for k in 1..=num_levels {
        let map = generalize_once(&levels[k - 1].map)?;
        let assignment = assign(&map, d)?;
        levels.push(HierarchyLevel {
            level: k,
            map,
            assignment,
        });
    }
    Ok(GeneralizationHierarchy { levels })
}
