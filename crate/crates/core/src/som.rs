//! Base Self-Organizing Map: seeded initialization, online Kohonen training
//! and best-matching-unit assignment.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ObjectId, WeightedDataset};
use crate::error::{Error, Result};

/// Learning rate reached at the last epoch.
pub const LEARNING_RATE_FLOOR: f64 = 0.01;
/// Neighbourhood radius reached at the last epoch.
pub const RADIUS_FLOOR: f64 = 0.5;

/// Grid position of a neuron. Ordering is row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Neuron {
    pub row: usize,
    pub col: usize,
}

impl Neuron {
    pub fn new(row: usize, col: usize) -> Self {
        Neuron { row, col }
    }
}

impl fmt::Display for Neuron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    #[default]
    Euclidean,
    Cosine,
}

impl Distance {
    /// Squared Euclidean distance, or `1 - cos` for cosine. A zero vector has
    /// cosine distance 1 to everything.
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            Distance::Cosine => {
                let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    1.0 - dot / (na.sqrt() * nb.sqrt())
                }
            }
        }
    }
}

impl std::str::FromStr for Distance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Distance::Euclidean),
            "cosine" => Ok(Distance::Cosine),
            other => Err(Error::Param(format!("unknown distance {other:?}"))),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distance::Euclidean => "euclidean",
            Distance::Cosine => "cosine",
        })
    }
}

/// A rectangular grid of codebook vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SomMap {
    rows: usize,
    cols: usize,
    dim: usize,
    distance: Distance,
    codebooks: Vec<Vec<f64>>,
}

impl SomMap {
    pub fn from_codebooks(
        rows: usize,
        cols: usize,
        distance: Distance,
        codebooks: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Param(format!("empty {rows}x{cols} map")));
        }
        if codebooks.len() != rows * cols {
            return Err(Error::Param(format!(
                "{rows}x{cols} map needs {} codebooks, got {}",
                rows * cols,
                codebooks.len()
            )));
        }
        let dim = codebooks[0].len();
        for cb in &codebooks {
            if cb.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: cb.len(),
                });
            }
            if cb.iter().any(|x| !x.is_finite()) {
                return Err(Error::Param("codebook entries must be finite".into()));
            }
        }
        Ok(SomMap {
            rows,
            cols,
            dim,
            distance,
            codebooks,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_neurons(&self) -> usize {
        self.rows * self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn distance(&self) -> Distance {
        self.distance
    }

    pub fn with_distance(mut self, distance: Distance) -> Self {
        self.distance = distance;
        self
    }

    pub fn index(&self, n: Neuron) -> usize {
        n.row * self.cols + n.col
    }

    pub fn neuron_at(&self, index: usize) -> Neuron {
        Neuron::new(index / self.cols, index % self.cols)
    }

    pub fn codebook(&self, n: Neuron) -> &[f64] {
        &self.codebooks[self.index(n)]
    }

    /// All codebooks in row-major order.
    pub fn codebooks(&self) -> &[Vec<f64>] {
        &self.codebooks
    }

    pub fn neurons(&self) -> impl Iterator<Item = Neuron> + '_ {
        (0..self.num_neurons()).map(|i| self.neuron_at(i))
    }

    fn bmu_index(&self, v: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, cb) in self.codebooks.iter().enumerate() {
            let d = self.distance.eval(cb, v);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Training hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SomParams {
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub initial_radius: f64,
    pub seed: u64,
    pub distance: Distance,
}

impl Default for SomParams {
    fn default() -> Self {
        SomParams {
            epochs: 20,
            initial_learning_rate: 0.5,
            initial_radius: 5.0,
            seed: 0,
            distance: Distance::Euclidean,
        }
    }
}

impl SomParams {
    /// Defaults with the initial radius set to half the larger grid side.
    pub fn for_grid(rows: usize, cols: usize, seed: u64) -> Self {
        SomParams {
            initial_radius: (rows.max(cols) as f64 / 2.0).max(1.0),
            seed,
            ..SomParams::default()
        }
    }

    fn validate(&self, m: &SomMap) -> Result<()> {
        let lr = self.initial_learning_rate;
        if !(lr > 0.0 && lr <= 1.0) {
            return Err(Error::Param(format!(
                "initial learning rate must lie in (0, 1], got {lr}"
            )));
        }
        let r = self.initial_radius;
        let side = m.rows.max(m.cols) as f64;
        if !(r > 0.0 && r <= side) {
            return Err(Error::Param(format!(
                "initial radius must lie in (0, {side}], got {r}"
            )));
        }
        Ok(())
    }
}

/// Random initial map: every codebook is a random convex combination of
/// three randomly drawn dataset rows.
pub fn init_map(rows: usize, cols: usize, d: &WeightedDataset, seed: u64) -> Result<SomMap> {
    if rows < 2 || cols < 2 {
        return Err(Error::Param(format!(
            "map must be at least 2x2 to be generalized, got {rows}x{cols}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = d.num_objects();
    let dim = d.num_features();
    let mut codebooks = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let mut cb = vec![0.0; dim];
        let picks: [(usize, f64); 3] =
            std::array::from_fn(|_| (rng.random_range(0..n), rng.random::<f64>() + 1e-3));
        let total: f64 = picks.iter().map(|p| p.1).sum();
        for (o, lambda) in picks {
            for &(t, w) in d.row(ObjectId(o)) {
                cb[t.0] += lambda / total * w;
            }
        }
        codebooks.push(cb);
    }
    SomMap::from_codebooks(rows, cols, Distance::Euclidean, codebooks)
}

pub fn train(m: &SomMap, d: &WeightedDataset, p: &SomParams) -> Result<SomMap> {
    train_with_observer(m, d, p, |_, _| {})
}

/// Online Kohonen training. `observer` sees the map after every epoch.
///
/// Per epoch the objects are visited in a freshly shuffled order; the
/// learning rate and the Gaussian neighbourhood radius fall linearly from
/// their initial values towards [`LEARNING_RATE_FLOOR`] / [`RADIUS_FLOOR`].
pub fn train_with_observer<F>(
    m: &SomMap,
    d: &WeightedDataset,
    p: &SomParams,
    mut observer: F,
) -> Result<SomMap>
where
    F: FnMut(usize, &SomMap),
{
    if d.num_features() != m.dim {
        return Err(Error::DimensionMismatch {
            expected: m.dim,
            actual: d.num_features(),
        });
    }
    let mut map = m.clone().with_distance(p.distance);
    if p.epochs == 0 {
        return Ok(map);
    }
    p.validate(&map)?;

    let data = d.to_dense();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let lr_floor = LEARNING_RATE_FLOOR.min(p.initial_learning_rate);
    let radius_floor = RADIUS_FLOOR.min(p.initial_radius);

    for epoch in 0..p.epochs {
        let progress = epoch as f64 / p.epochs as f64;
        let lr = p.initial_learning_rate + (lr_floor - p.initial_learning_rate) * progress;
        let radius = p.initial_radius + (radius_floor - p.initial_radius) * progress;
        let two_sigma_sq = 2.0 * radius * radius;

        order.shuffle(&mut rng);
        for &o in &order {
            let x = &data[o];
            let winner = map.neuron_at(map.bmu_index(x));
            for idx in 0..map.num_neurons() {
                let n = map.neuron_at(idx);
                let dr = n.row as f64 - winner.row as f64;
                let dc = n.col as f64 - winner.col as f64;
                let step = lr * (-(dr * dr + dc * dc) / two_sigma_sq).exp();
                if step < 1e-12 {
                    continue;
                }
                for (w, xv) in map.codebooks[idx].iter_mut().zip(x) {
                    *w += step * (xv - *w);
                }
            }
        }
        observer(epoch, &map);
    }
    Ok(map)
}

/// Best-matching unit; ties go to the first neuron in row-major order.
pub fn bmu(m: &SomMap, v: &[f64]) -> Neuron {
    debug_assert_eq!(v.len(), m.dim);
    m.neuron_at(m.bmu_index(v))
}

/// Maps every object to a neuron of a `rows × cols` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    rows: usize,
    cols: usize,
    neuron_of: Vec<Neuron>,
}

impl ClusterAssignment {
    pub fn new(rows: usize, cols: usize, neuron_of: Vec<Neuron>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Param(format!("empty {rows}x{cols} grid")));
        }
        if let Some(n) = neuron_of.iter().find(|n| n.row >= rows || n.col >= cols) {
            return Err(Error::Param(format!(
                "neuron {n} outside the {rows}x{cols} grid"
            )));
        }
        Ok(ClusterAssignment {
            rows,
            cols,
            neuron_of,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of clusters at this level, empty ones included.
    pub fn num_clusters(&self) -> usize {
        self.rows * self.cols
    }

    pub fn num_objects(&self) -> usize {
        self.neuron_of.len()
    }

    pub fn neuron(&self, o: ObjectId) -> Neuron {
        self.neuron_of[o.0]
    }

    pub fn labels(&self) -> &[Neuron] {
        &self.neuron_of
    }

    pub fn cluster_index(&self, n: Neuron) -> usize {
        n.row * self.cols + n.col
    }

    pub fn neuron_at(&self, index: usize) -> Neuron {
        Neuron::new(index / self.cols, index % self.cols)
    }

    pub fn members(&self, n: Neuron) -> Vec<ObjectId> {
        self.neuron_of
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == n)
            .map(|(o, _)| ObjectId(o))
            .collect()
    }

    /// Member lists for every neuron, row-major; empty neurons give empty lists.
    pub fn clusters(&self) -> Vec<Vec<ObjectId>> {
        let mut out = vec![Vec::new(); self.num_clusters()];
        for (o, &n) in self.neuron_of.iter().enumerate() {
            out[self.cluster_index(n)].push(ObjectId(o));
        }
        out
    }

    /// Reads `object,row,col` records, resolving object names against `d`.
    /// The grid is the smallest one containing every listed neuron unless
    /// `grid` is given.
    pub fn read_csv<R: Read>(
        reader: R,
        d: &WeightedDataset,
        grid: Option<(usize, usize)>,
        context: &str,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut slots: Vec<Option<Neuron>> = vec![None; d.num_objects()];
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 2;
            let rec = rec.map_err(|e| Error::parse(context, line, e.to_string()))?;
            if rec.len() != 3 {
                return Err(Error::parse(context, line, "expected object,row,col"));
            }
            let o = d.object_id(&rec[0]).ok_or_else(|| {
                Error::parse(context, line, format!("unknown object {:?}", &rec[0]))
            })?;
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(context, line, format!("bad grid index {s:?}")))
            };
            let n = Neuron::new(parse(&rec[1])?, parse(&rec[2])?);
            if slots[o.0].replace(n).is_some() {
                return Err(Error::parse(
                    context,
                    line,
                    format!("object {:?} assigned twice", &rec[0]),
                ));
            }
        }
        let mut labels = Vec::with_capacity(slots.len());
        for (o, s) in slots.into_iter().enumerate() {
            labels.push(s.ok_or_else(|| {
                Error::Dataset(format!(
                    "{context}: object {:?} has no cluster",
                    d.object_names()[o]
                ))
            })?);
        }
        let (rows, cols) = grid.unwrap_or_else(|| {
            (
                labels.iter().map(|n| n.row + 1).max().unwrap_or(1),
                labels.iter().map(|n| n.col + 1).max().unwrap_or(1),
            )
        });
        ClusterAssignment::new(rows, cols, labels)
    }

    pub fn load_csv(path: impl AsRef<Path>, d: &WeightedDataset) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(BufReader::new(file), d, None, &path.display().to_string())
    }

    pub fn write_csv<W: Write>(&self, writer: W, d: &WeightedDataset) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Dataset(format!("csv write failed: {e}"));
        w.write_record(["object", "row", "col"]).map_err(err)?;
        for (o, n) in self.neuron_of.iter().enumerate() {
            w.write_record([
                d.object_names()[o].as_str(),
                &n.row.to_string(),
                &n.col.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<assignment csv>", e))
    }
}

pub fn assign(m: &SomMap, d: &WeightedDataset) -> Result<ClusterAssignment> {
    if d.num_features() != m.dim {
        return Err(Error::DimensionMismatch {
            expected: m.dim,
            actual: d.num_features(),
        });
    }
    let labels = d.objects().map(|o| bmu(m, &d.dense_row(o))).collect();
    ClusterAssignment::new(m.rows, m.cols, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::five_objects;
    use crate::dataset::SyntheticCorpus;
    use crate::dataset::SyntheticParams;

    fn basis_map() -> SomMap {
        let e = |i: usize| {
            let mut v = vec![0.0; 4];
            v[i] = 1.0;
            v
        };
        SomMap::from_codebooks(2, 2, Distance::Euclidean, (0..4).map(e).collect()).unwrap()
    }

    #[test]
    fn bmu_exact_match() {
        let m = basis_map();
        assert_eq!(bmu(&m, &[0.0, 1.0, 0.0, 0.0]), Neuron::new(0, 1));
    }

    #[test]
    fn bmu_tie_goes_row_major() {
        let m = basis_map();
        // equidistant from e2 at (0,1) and e3 at (1,0)
        assert_eq!(bmu(&m, &[0.0, 0.5, 0.5, 0.0]), Neuron::new(0, 1));
        // all four equidistant
        assert_eq!(bmu(&m, &[0.25; 4]), Neuron::new(0, 0));
    }

    #[test]
    fn bmu_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let cbs: Vec<Vec<f64>> = (0..9)
                .map(|_| (0..5).map(|_| rng.random::<f64>()).collect())
                .collect();
            let v: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            for dist in [Distance::Euclidean, Distance::Cosine] {
                let m = SomMap::from_codebooks(3, 3, dist, cbs.clone()).unwrap();
                let got = bmu(&m, &v);
                let dists: Vec<f64> = cbs.iter().map(|c| dist.eval(c, &v)).collect();
                let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
                let first = dists.iter().position(|&x| x == min).unwrap();
                assert_eq!(m.index(got), first);
            }
        }
    }

    #[test]
    fn init_shapes_and_determinism() {
        let d = five_objects();
        let m = init_map(2, 2, &d, 3).unwrap();
        assert_eq!(m.num_neurons(), 4);
        assert!(m.codebooks().iter().all(|c| c.len() == 6));
        assert_eq!(m, init_map(2, 2, &d, 3).unwrap());
        assert!(init_map(1, 4, &d, 3).is_err());
        assert!(init_map(4, 1, &d, 3).is_err());

        let big = SyntheticCorpus::generate(SyntheticParams::new(4, 250, 58, 0.02, 7))
            .unwrap()
            .dataset;
        let m = init_map(10, 10, &big, 1).unwrap();
        assert_eq!(m.num_neurons(), 100);
        assert_eq!(m.dim(), 232);
    }

    #[test]
    fn zero_epochs_is_identity() {
        let d = five_objects();
        let m = init_map(2, 3, &d, 1).unwrap();
        let p = SomParams {
            epochs: 0,
            ..SomParams::for_grid(2, 3, 0)
        };
        assert_eq!(train(&m, &d, &p).unwrap(), m);
    }

    #[test]
    fn converges_to_single_point() {
        let v = vec![1.0, 2.0, 0.0, 3.0];
        let d = WeightedDataset::from_dense(
            (0..4).map(|i| format!("o{i}")).collect(),
            (0..4).map(|i| format!("f{i}")).collect(),
            vec![v.clone(); 4],
        )
        .unwrap();
        let m = SomMap::from_codebooks(
            3,
            3,
            Distance::Euclidean,
            (0..9).map(|i| vec![i as f64, -1.0, 2.0, 0.5 * i as f64]).collect(),
        )
        .unwrap();
        let max_dist = |m: &SomMap| {
            m.codebooks()
                .iter()
                .map(|c| Distance::Euclidean.eval(c, &v))
                .fold(0.0, f64::max)
        };
        let mut trace = vec![max_dist(&m)];
        let p = SomParams {
            epochs: 8,
            ..SomParams::for_grid(3, 3, 5)
        };
        train_with_observer(&m, &d, &p, |_, m| trace.push(max_dist(m))).unwrap();
        assert_eq!(trace.len(), 9);
        for w in trace.windows(2) {
            assert!(w[1] < w[0], "{trace:?}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let d = SyntheticCorpus::generate(SyntheticParams::new(3, 20, 8, 0.05, 2))
            .unwrap()
            .dataset;
        let m = init_map(4, 4, &d, 9).unwrap();
        let p = SomParams::for_grid(4, 4, 9);
        let a = train(&m, &d, &p).unwrap();
        let b = train(&m, &d, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(assign(&a, &d).unwrap(), assign(&b, &d).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let d = five_objects();
        let m = SomMap::from_codebooks(2, 2, Distance::Euclidean, vec![vec![0.0; 3]; 4]).unwrap();
        assert!(matches!(
            train(&m, &d, &SomParams::for_grid(2, 2, 0)),
            Err(Error::DimensionMismatch { expected: 3, actual: 6 })
        ));
        assert!(assign(&m, &d).is_err());
    }

    #[test]
    fn bad_params() {
        let d = five_objects();
        let m = init_map(2, 2, &d, 0).unwrap();
        let mut p = SomParams::for_grid(2, 2, 0);
        p.initial_radius = 3.0;
        assert!(train(&m, &d, &p).is_err());
        p.initial_radius = 1.0;
        p.initial_learning_rate = 0.0;
        assert!(train(&m, &d, &p).is_err());
    }

    #[test]
    fn centroid_fixture_reproduces_fixed_clusters() {
        let d = five_objects();
        let dense = d.to_dense();
        let centroid = |objs: &[usize]| -> Vec<f64> {
            (0..6)
                .map(|t| objs.iter().map(|&o| dense[o][t]).sum::<f64>() / objs.len() as f64)
                .collect()
        };
        // 1x2 map: centroids of {d1,d2,d3} and {d4,d5}
        let m = SomMap {
            rows: 1,
            cols: 2,
            dim: 6,
            distance: Distance::Euclidean,
            codebooks: vec![centroid(&[0, 1, 2]), centroid(&[3, 4])],
        };
        let a = assign(&m, &d).unwrap();
        let left = Neuron::new(0, 0);
        let right = Neuron::new(0, 1);
        assert_eq!(a.labels(), &[left, left, left, right, right]);
        assert_eq!(a.clusters().iter().map(Vec::len).sum::<usize>(), 5);
    }

    #[test]
    fn single_neuron_takes_everything() {
        let d = five_objects();
        let m = SomMap::from_codebooks(1, 1, Distance::Euclidean, vec![vec![0.0; 6]]).unwrap();
        let a = assign(&m, &d).unwrap();
        assert_eq!(a.clusters(), vec![d.objects().collect::<Vec<_>>()]);
    }

    #[test]
    fn assignment_csv_roundtrip() {
        let d = five_objects();
        let labels = vec![
            Neuron::new(0, 0),
            Neuron::new(0, 0),
            Neuron::new(0, 0),
            Neuron::new(0, 1),
            Neuron::new(0, 1),
        ];
        let a = ClusterAssignment::new(1, 2, labels).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf, &d).unwrap();
        let back = ClusterAssignment::read_csv(buf.as_slice(), &d, None, "mem").unwrap();
        assert_eq!(a, back);

        let missing = "object,row,col\nd1,0,0\n";
        assert!(ClusterAssignment::read_csv(missing.as_bytes(), &d, None, "m").is_err());
        let unknown = "object,row,col\nzz,0,0\n";
        assert!(ClusterAssignment::read_csv(unknown.as_bytes(), &d, None, "m").is_err());
    }
}
