//! Object × feature data model.
//!
//! A [`WeightedDataset`] stores strictly positive weights sparsely; a zero
//! weight means the feature is absent from the object. [`BinaryDataset`] is
//! the presence view used by every counting measure and by Apriori.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod synthetic;

pub use synthetic::{generate_synthetic, SyntheticCorpus, SyntheticParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectId(pub usize);

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

/// Sparse non-negative weight matrix with named rows (objects) and columns
/// (features). Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDataset {
    object_names: Vec<String>,
    feature_names: Vec<String>,
    // per object, (feature, weight) sorted by feature, weight > 0
    rows: Vec<Vec<(FeatureId, f64)>>,
}

impl WeightedDataset {
    /// Builds a dataset from sparse rows. Zero weights are dropped; negative,
    /// non-finite or out-of-range entries are rejected.
    pub fn from_sparse(
        object_names: Vec<String>,
        feature_names: Vec<String>,
        rows: Vec<Vec<(FeatureId, f64)>>,
    ) -> Result<Self> {
        if object_names.is_empty() {
            return Err(Error::Dataset("a dataset needs at least one object".into()));
        }
        if rows.len() != object_names.len() {
            return Err(Error::Dataset(format!(
                "{} object names but {} rows",
                object_names.len(),
                rows.len()
            )));
        }
        check_unique("object", &object_names)?;
        check_unique("feature", &feature_names)?;

        let num_features = feature_names.len();
        let mut clean = Vec::with_capacity(rows.len());
        for (o, mut row) in rows.into_iter().enumerate() {
            row.retain(|&(_, w)| w != 0.0);
            for &(t, w) in &row {
                if t.0 >= num_features {
                    return Err(Error::Dataset(format!(
                        "object {}: feature index {} out of range ({} features)",
                        object_names[o], t.0, num_features
                    )));
                }
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Dataset(format!(
                        "object {}: invalid weight {} for feature {}",
                        object_names[o], w, feature_names[t.0]
                    )));
                }
            }
            row.sort_by_key(|&(t, _)| t);
            if row.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::Dataset(format!(
                    "object {}: feature listed twice",
                    object_names[o]
                )));
            }
            clean.push(row);
        }
        Ok(WeightedDataset {
            object_names,
            feature_names,
            rows: clean,
        })
    }

    pub fn from_dense(
        object_names: Vec<String>,
        feature_names: Vec<String>,
        dense: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let width = feature_names.len();
        let mut rows = Vec::with_capacity(dense.len());
        for (o, values) in dense.into_iter().enumerate() {
            if values.len() != width {
                return Err(Error::Dataset(format!(
                    "row {} has {} values, expected {}",
                    o,
                    values.len(),
                    width
                )));
            }
            rows.push(
                values
                    .into_iter()
                    .enumerate()
                    .map(|(t, w)| (FeatureId(t), w))
                    .collect(),
            );
        }
        Self::from_sparse(object_names, feature_names, rows)
    }

    pub fn num_objects(&self) -> usize {
        self.rows.len()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn object_names(&self) -> &[String] {
        &self.object_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn object_name(&self, o: ObjectId) -> &str {
        &self.object_names[o.0]
    }

    pub fn feature_name(&self, t: FeatureId) -> &str {
        &self.feature_names[t.0]
    }

    pub fn feature_id(&self, name: &str) -> Option<FeatureId> {
        self.feature_names.iter().position(|n| n == name).map(FeatureId)
    }

    pub fn object_id(&self, name: &str) -> Option<ObjectId> {
        self.object_names.iter().position(|n| n == name).map(ObjectId)
    }

    /// Stored (strictly positive) entries of one object, sorted by feature.
    pub fn row(&self, o: ObjectId) -> &[(FeatureId, f64)] {
        &self.rows[o.0]
    }

    pub fn weight(&self, o: ObjectId, t: FeatureId) -> f64 {
        let row = &self.rows[o.0];
        row.binary_search_by_key(&t, |&(f, _)| f)
            .map(|i| row[i].1)
            .unwrap_or(0.0)
    }

    /// Number of stored (non-zero) cells.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn dense_row(&self, o: ObjectId) -> Vec<f64> {
        let mut v = vec![0.0; self.num_features()];
        for &(t, w) in &self.rows[o.0] {
            v[t.0] = w;
        }
        v
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.num_objects())
            .map(|o| self.dense_row(ObjectId(o)))
            .collect()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.num_objects()).map(ObjectId)
    }

    pub fn binarize(&self) -> BinaryDataset {
        binarize(self)
    }

    pub fn read_matrix_csv<R: Read>(reader: R, context: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = rdr.records();

        let header = match records.next() {
            Some(r) => r.map_err(|e| csv_error(context, e))?,
            None => return Err(Error::parse(context, 1, "missing header row")),
        };
        let first = header.get(0).unwrap_or("");
        if !(first.is_empty() || first.eq_ignore_ascii_case("object")) {
            return Err(Error::parse(
                context,
                1,
                format!("first header cell must be empty or \"object\", found {first:?}"),
            ));
        }
        let feature_names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        if let Some(dup) = first_duplicate(&feature_names) {
            return Err(Error::parse(
                context,
                1,
                format!("duplicate feature name {dup:?}"),
            ));
        }

        let mut object_names = Vec::new();
        let mut rows = Vec::new();
        let mut seen = HashMap::new();
        for (idx, rec) in records.enumerate() {
            let line = idx + 2;
            let rec = rec.map_err(|e| csv_error(context, e))?;
            if rec.len() == 1 && rec.get(0) == Some("") {
                continue;
            }
            if rec.len() != feature_names.len() + 1 {
                return Err(Error::parse(
                    context,
                    line,
                    format!(
                        "expected {} cells (name + {} weights), found {}",
                        feature_names.len() + 1,
                        feature_names.len(),
                        rec.len()
                    ),
                ));
            }
            let name = rec[0].to_owned();
            if seen.insert(name.clone(), line).is_some() {
                return Err(Error::parse(
                    context,
                    line,
                    format!("duplicate object name {name:?}"),
                ));
            }
            let mut row = Vec::new();
            for (col, cell) in rec.iter().skip(1).enumerate() {
                let w: f64 = cell.parse().map_err(|_| {
                    Error::parse(
                        context,
                        line,
                        format!("column {} ({}): not a number: {cell:?}", col + 2, feature_names[col]),
                    )
                })?;
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::parse(
                        context,
                        line,
                        format!(
                            "column {} ({}): weight must be a non-negative real, found {cell}",
                            col + 2,
                            feature_names[col]
                        ),
                    ));
                }
                if w > 0.0 {
                    row.push((FeatureId(col), w));
                }
            }
            object_names.push(name);
            rows.push(row);
        }
        if object_names.is_empty() {
            return Err(Error::parse(context, 2, "no object rows"));
        }
        Self::from_sparse(object_names, feature_names, rows)
    }

    pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_matrix_csv(BufReader::new(file), &path.display().to_string())
    }

    /// Writes the dense matrix layout read by [`WeightedDataset::read_matrix_csv`].
    /// Weights use the shortest representation that parses back exactly.
    pub fn write_matrix_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["object".to_owned()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header).map_err(csv_write_error)?;
        for o in self.objects() {
            let mut rec = Vec::with_capacity(self.num_features() + 1);
            rec.push(self.object_name(o).to_owned());
            rec.extend(self.dense_row(o).into_iter().map(|x| x.to_string()));
            w.write_record(&rec).map_err(csv_write_error)?;
        }
        w.flush()
            .map_err(|e| Error::io("<matrix csv>", e))?;
        Ok(())
    }

    pub fn save_matrix_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_matrix_csv(std::io::BufWriter::new(file))
    }
}

/// Result of reading a transaction file.
#[derive(Debug, Clone)]
pub struct TransactionLoad {
    pub dataset: WeightedDataset,
    /// Blank lines that were skipped.
    pub skipped_lines: usize,
}

/// Parses market-basket transactions: one per line, items separated by runs
/// of spaces or tabs. Every present item gets weight 1; repeated items in a
/// line collapse. Objects are named `d1`, `d2`, ... in line order (blank
/// lines do not consume a name).
pub fn read_transactions<R: BufRead>(reader: R, context: &str) -> Result<TransactionLoad> {
    let mut vocab: HashMap<String, usize> = HashMap::new();
    let mut feature_names = Vec::new();
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(context, idx + 1, e.to_string()))?;
        let items: Vec<&str> = line.split([' ', '\t']).filter(|s| !s.is_empty()).collect();
        if items.is_empty() {
            skipped += 1;
            continue;
        }
        let mut row: Vec<(FeatureId, f64)> = Vec::with_capacity(items.len());
        for item in items {
            let next = feature_names.len();
            let id = *vocab.entry(item.to_owned()).or_insert_with(|| {
                feature_names.push(item.to_owned());
                next
            });
            if !row.iter().any(|&(t, _)| t.0 == id) {
                row.push((FeatureId(id), 1.0));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(context, 1, "no transactions"));
    }
    if skipped > 0 {
        log::warn!("{context}: skipped {skipped} empty line(s)");
    }
    let object_names = (1..=rows.len()).map(|i| format!("d{i}")).collect();
    Ok(TransactionLoad {
        dataset: WeightedDataset::from_sparse(object_names, feature_names, rows)?,
        skipped_lines: skipped,
    })
}

pub fn load_transactions(path: impl AsRef<Path>) -> Result<WeightedDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(read_transactions(BufReader::new(file), &path.display().to_string())?.dataset)
}

/// Presence view: for each object, the sorted set of features it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    num_features: usize,
    rows: Vec<Vec<FeatureId>>,
}

impl BinaryDataset {
    /// Rows are sorted and deduplicated; feature ids must be `< num_features`.
    pub fn new(num_features: usize, rows: Vec<Vec<FeatureId>>) -> Result<Self> {
        let mut clean = Vec::with_capacity(rows.len());
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            if let Some(t) = row.iter().find(|t| t.0 >= num_features) {
                return Err(Error::Dataset(format!(
                    "feature index {} out of range ({num_features} features)",
                    t.0
                )));
            }
            clean.push(row);
        }
        Ok(BinaryDataset {
            num_features,
            rows: clean,
        })
    }

    pub fn num_objects(&self) -> usize {
        self.rows.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn rows(&self) -> &[Vec<FeatureId>] {
        &self.rows
    }

    pub fn row(&self, o: ObjectId) -> &[FeatureId] {
        &self.rows[o.0]
    }

    pub fn contains(&self, o: ObjectId, t: FeatureId) -> bool {
        self.rows[o.0].binary_search(&t).is_ok()
    }

    /// Number of objects whose feature set includes every item of `items`
    /// (which must be sorted).
    pub fn support_count(&self, items: &[FeatureId]) -> usize {
        self.rows.iter().filter(|row| is_subset(items, row)).count()
    }

    /// Objects `objects` projected onto `features` (the per-cluster local
    /// dataset). Feature ids keep their global numbering.
    pub fn restrict(&self, objects: &[ObjectId], features: &[FeatureId]) -> BinaryDataset {
        let mut keep = features.to_vec();
        keep.sort_unstable();
        let rows = objects
            .iter()
            .map(|&o| {
                self.rows[o.0]
                    .iter()
                    .copied()
                    .filter(|t| keep.binary_search(t).is_ok())
                    .collect()
            })
            .collect();
        BinaryDataset {
            num_features: self.num_features,
            rows,
        }
    }
}

pub fn binarize(d: &WeightedDataset) -> BinaryDataset {
    BinaryDataset {
        num_features: d.num_features(),
        rows: d
            .rows
            .iter()
            .map(|row| row.iter().filter(|&&(_, w)| w > 0.0).map(|&(t, _)| t).collect())
            .collect(),
    }
}

/// `a ⊆ b` for sorted slices.
pub(crate) fn is_subset(a: &[FeatureId], b: &[FeatureId]) -> bool {
    let mut it = b.iter();
    'outer: for x in a {
        for y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

fn check_unique(kind: &str, names: &[String]) -> Result<()> {
    match first_duplicate(names) {
        Some(dup) => Err(Error::Dataset(format!("duplicate {kind} name {dup:?}"))),
        None => Ok(()),
    }
}

fn first_duplicate(names: &[String]) -> Option<&str> {
    let mut seen = std::collections::HashSet::new();
    names.iter().find(|n| !seen.insert(n.as_str())).map(String::as_str)
}

fn csv_error(context: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::parse(context, line, e.to_string())
}

fn csv_write_error(e: csv::Error) -> Error {
    Error::Dataset(format!("csv write failed: {e}"))
}
