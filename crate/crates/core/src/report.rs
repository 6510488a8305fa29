//! Per-level rule statistics and the MARC-versus-Apriori comparison.

use std::fmt;
use std::io::{Read, Write};

use crate::apriori::{mine_rules, MiningParams, SymbolicRule};
use crate::dataset::WeightedDataset;
use crate::error::{Error, Result};
use crate::marc::{AssociationRule, RuleCollection, RuleType};
use crate::multisom::GeneralizationHierarchy;

pub const STATS_HEADER: [&str; 8] = [
    "level",
    "clusters",
    "type1_count",
    "type2_count",
    "type1_mean_conf",
    "type2_mean_conf",
    "type1_mean_len",
    "type2_mean_len",
];

/// Rule counts and averages for one level. Means are `None` when the level
/// has no rule of that type.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub level: usize,
    pub clusters: usize,
    pub type1_count: usize,
    pub type2_count: usize,
    pub type1_mean_conf: Option<f64>,
    pub type2_mean_conf: Option<f64>,
    pub type1_mean_len: Option<f64>,
    pub type2_mean_len: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// One row per level; `cluster_counts[k]` is the number of neurons at level k.
pub fn level_stats(rules: &RuleCollection, cluster_counts: &[usize]) -> Vec<LevelStats> {
    cluster_counts
        .iter()
        .enumerate()
        .map(|(level, &clusters)| {
            let of = |t: RuleType| -> Vec<&AssociationRule> {
                rules.at_level(level).filter(|r| r.rule_type == t).collect()
            };
            let (t1, t2) = (of(RuleType::TypeI), of(RuleType::TypeII));
            LevelStats {
                level,
                clusters,
                type1_count: t1.len(),
                type2_count: t2.len(),
                type1_mean_conf: mean(t1.iter().map(|r| r.confidence)),
                type2_mean_conf: mean(t2.iter().map(|r| r.confidence)),
                type1_mean_len: mean(t1.iter().map(|r| r.len() as f64)),
                type2_mean_len: mean(t2.iter().map(|r| r.len() as f64)),
            }
        })
        .collect()
}

pub fn hierarchy_level_stats(rules: &RuleCollection, h: &GeneralizationHierarchy) -> Vec<LevelStats> {
    level_stats(rules, &h.neuron_counts())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_stats_csv<W: Write>(writer: W, stats: &[LevelStats]) -> Result<()> {
    let err = |e: csv::Error| Error::Dataset(format!("csv write failed: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STATS_HEADER).map_err(err)?;
    for s in stats {
        w.write_record([
            s.level.to_string(),
            s.clusters.to_string(),
            s.type1_count.to_string(),
            s.type2_count.to_string(),
            opt(s.type1_mean_conf),
            opt(s.type2_mean_conf),
            opt(s.type1_mean_len),
            opt(s.type2_mean_len),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<stats csv>", e))
}

pub fn read_stats_csv<R: Read>(reader: R, context: &str) -> Result<Vec<LevelStats>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(context, 1, e.to_string()))?;
    if header.iter().ne(STATS_HEADER) {
        return Err(Error::parse(context, 1, "not a stats file header"));
    }
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::parse(context, line, e.to_string()))?;
        let int = |i: usize| -> Result<usize> {
            rec[i]
                .parse()
                .map_err(|_| Error::parse(context, line, format!("{}: bad integer", STATS_HEADER[i])))
        };
        let real = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                return Ok(None);
            }
            rec[i]
                .parse()
                .map(Some)
                .map_err(|_| Error::parse(context, line, format!("{}: bad number", STATS_HEADER[i])))
        };
        out.push(LevelStats {
            level: int(0)?,
            clusters: int(1)?,
            type1_count: int(2)?,
            type2_count: int(3)?,
            type1_mean_conf: real(4)?,
            type2_mean_conf: real(5)?,
            type1_mean_len: real(6)?,
            type2_mean_len: real(7)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSummary {
    pub rule_count: usize,
    pub mean_confidence: Option<f64>,
    pub mean_length: Option<f64>,
}

impl MethodSummary {
    fn of(rules: impl Iterator<Item = (f64, usize)>) -> Self {
        let rules: Vec<_> = rules.collect();
        MethodSummary {
            rule_count: rules.len(),
            mean_confidence: mean(rules.iter().map(|&(c, _)| c)),
            mean_length: mean(rules.iter().map(|&(_, l)| l as f64)),
        }
    }
}

/// Mean confidence, mean length and count for the symbolic baseline and the
/// two MARC rule types.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub baseline: MethodSummary,
    pub type1: MethodSummary,
    pub type2: MethodSummary,
    /// Type I and Type II pooled.
    pub marc: MethodSummary,
}

pub fn summarize_baseline(rules: &[SymbolicRule]) -> MethodSummary {
    MethodSummary::of(rules.iter().map(|r| (r.confidence, r.len())))
}

/// Runs Apriori on the whole binarized dataset with `baseline` and sets its
/// averages beside those of `marc_rules`.
pub fn compare(marc_rules: &RuleCollection, d: &WeightedDataset, baseline: &MiningParams) -> Result<ComparisonReport> {
    let symbolic = mine_rules(&d.binarize(), baseline)?;
    Ok(compare_with_baseline(marc_rules, &symbolic))
}

pub fn compare_with_baseline(marc_rules: &RuleCollection, symbolic: &[SymbolicRule]) -> ComparisonReport {
    let summary = |t: Option<RuleType>| {
        MethodSummary::of(
            marc_rules
                .iter()
                .filter(move |r| t.is_none_or(|t| r.rule_type == t))
                .map(|r| (r.confidence, r.len())),
        )
    };
    ComparisonReport {
        baseline: summarize_baseline(symbolic),
        type1: summary(Some(RuleType::TypeI)),
        type2: summary(Some(RuleType::TypeII)),
        marc: summary(None),
    }
}

impl ComparisonReport {
    fn rows(&self) -> [(&'static str, &MethodSummary); 4] {
        [
            ("apriori", &self.baseline),
            ("marc_type1", &self.type1),
            ("marc_type2", &self.type2),
            ("marc_all", &self.marc),
        ]
    }

    /// `method,rules,mean_confidence,mean_length`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let err = |e: csv::Error| Error::Dataset(format!("csv write failed: {e}"));
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["method", "rules", "mean_confidence", "mean_length"])
            .map_err(err)?;
        for (name, s) in self.rows() {
            w.write_record([
                name.to_owned(),
                s.rule_count.to_string(),
                opt(s.mean_confidence),
                opt(s.mean_length),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<comparison csv>", e))
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell = |x: Option<f64>| x.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"));
        writeln!(f, "{:<12} {:>10} {:>12} {:>12}", "method", "rules", "confidence", "length")?;
        for (name, s) in self.rows() {
            writeln!(
                f,
                "{:<12} {:>10} {:>12} {:>12}",
                name,
                s.rule_count,
                cell(s.mean_confidence),
                cell(s.mean_length)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::five_objects;
    use crate::marc::{mine_assignments, MarcParams};
    use crate::som::{ClusterAssignment, Neuron};

    fn fixture_rules() -> (WeightedDataset, RuleCollection) {
        let d = five_objects();
        let l = Neuron::new(0, 0);
        let r = Neuron::new(0, 1);
        let a = ClusterAssignment::new(1, 2, vec![l, l, l, r, r]).unwrap();
        let rules = mine_assignments([&a], &d, &MarcParams::default()).unwrap();
        (d, rules)
    }

    #[test]
    fn fixture_level_row() {
        let (_, rules) = fixture_rules();
        let stats = level_stats(&rules, &[2]);
        assert_eq!(stats.len(), 1);
        let s = &stats[0];
        assert_eq!(s.type1_count, 4);
        assert_eq!(s.type1_mean_conf, Some(1.0));
        assert_eq!(s.type1_mean_len, Some(3.25));
        assert_eq!(s.type2_count, 14);
    }

    #[test]
    fn empty_levels_have_absent_means() {
        let stats = level_stats(&RuleCollection::default(), &[100, 81]);
        for s in &stats {
            assert_eq!((s.type1_count, s.type2_count), (0, 0));
            assert!(s.type1_mean_conf.is_none() && s.type2_mean_len.is_none());
        }
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &stats).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "level,clusters,type1_count,type2_count,type1_mean_conf,type2_mean_conf,type1_mean_len,type2_mean_len\n0,100,0,0,,,,\n1,81,0,0,,,,\n"
        );
    }

    #[test]
    fn stats_csv_roundtrip() {
        let (_, rules) = fixture_rules();
        let stats = level_stats(&rules, &[2, 1]);
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &stats).unwrap();
        assert_eq!(read_stats_csv(buf.as_slice(), "mem").unwrap(), stats);
    }

    #[test]
    fn fixture_comparison() {
        let (d, rules) = fixture_rules();
        let report = compare(&rules, &d, &MiningParams::new(2, 0.0)).unwrap();
        assert_eq!(report.type1.mean_confidence, Some(1.0));
        let base = report.baseline.mean_confidence.unwrap();
        assert!(base < 1.0, "{base}");
        assert_eq!(report.marc.rule_count, 18);
    }

    #[test]
    fn perfect_cooccurrence_gives_unit_confidence() {
        let d = WeightedDataset::read_matrix_csv(",a,b,c\nx,1,2,3\ny,2,1,1\nz,1,1,1\n".as_bytes(), "t").unwrap();
        let l = Neuron::new(0, 0);
        let r = Neuron::new(0, 1);
        let a = ClusterAssignment::new(1, 2, vec![l, l, r]).unwrap();
        let rules = mine_assignments([&a], &d, &MarcParams::default()).unwrap();
        let report = compare(&rules, &d, &MiningParams::new(2, 0.0)).unwrap();
        assert_eq!(report.baseline.mean_confidence, Some(1.0));
        for s in [report.type1, report.type2] {
            assert!(s.mean_confidence.is_none_or(|c| c == 1.0));
        }
    }

    #[test]
    fn comparison_csv() {
        let (d, rules) = fixture_rules();
        let report = compare(&rules, &d, &MiningParams::new(2, 0.0)).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method,rules,mean_confidence,mean_length\napriori,"));
        assert!(text.contains("\nmarc_type1,4,1,3.25\n"), "{text}");
        assert!(report.to_string().contains("marc_type1"));
    }
}
