//! Rule files: one record per rule, as CSV or as JSON lines.
//!
//! Both carry the same fields: premise, conclusion, type, level,
//! cluster_row, cluster_col, support_count, support, confidence, length,
//! duplicate, echoes_type1. In CSV the items of a side are joined with `;`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::apriori::SymbolicRule;
use crate::dataset::FeatureId;
use crate::error::{Error, Result};
use crate::marc::{AssociationRule, RuleCollection, RuleType};
use crate::som::Neuron;

const ITEM_SEP: char = ';';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RuleFormat {
    #[default]
    Csv,
    Jsonl,
}

impl std::str::FromStr for RuleFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(RuleFormat::Csv),
            "jsonl" | "json" => Ok(RuleFormat::Jsonl),
            other => Err(Error::Param(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RuleRecord {
    premise: Vec<String>,
    conclusion: Vec<String>,
    #[serde(rename = "type")]
    rule_type: RuleType,
    level: usize,
    cluster_row: usize,
    cluster_col: usize,
    support_count: usize,
    support: f64,
    confidence: f64,
    length: usize,
    duplicate: bool,
    echoes_type1: bool,
}

const CSV_HEADER: [&str; 12] = [
    "premise",
    "conclusion",
    "type",
    "level",
    "cluster_row",
    "cluster_col",
    "support_count",
    "support",
    "confidence",
    "length",
    "duplicate",
    "echoes_type1",
];

fn record(r: &AssociationRule, names: &[String]) -> RuleRecord {
    let side = |s: &[FeatureId]| s.iter().map(|t| names[t.0].clone()).collect();
    RuleRecord {
        premise: side(&r.premise),
        conclusion: side(&r.conclusion),
        rule_type: r.rule_type,
        level: r.level,
        cluster_row: r.cluster.row,
        cluster_col: r.cluster.col,
        support_count: r.support_count,
        support: r.support,
        confidence: r.confidence,
        length: r.len(),
        duplicate: r.duplicate,
        echoes_type1: r.echoes_type1,
    }
}

fn resolve(rec: RuleRecord, vocab: &HashMap<&str, usize>, line: usize, context: &str) -> Result<AssociationRule> {
    let side = |names: &[String]| -> Result<Vec<FeatureId>> {
        names
            .iter()
            .map(|n| {
                vocab
                    .get(n.as_str())
                    .map(|&i| FeatureId(i))
                    .ok_or_else(|| Error::parse(context, line, format!("unknown feature {n:?}")))
            })
            .collect()
    };
    let rule = AssociationRule {
        premise: side(&rec.premise)?,
        conclusion: side(&rec.conclusion)?,
        rule_type: rec.rule_type,
        level: rec.level,
        cluster: Neuron::new(rec.cluster_row, rec.cluster_col),
        support_count: rec.support_count,
        support: rec.support,
        confidence: rec.confidence,
        duplicate: rec.duplicate,
        echoes_type1: rec.echoes_type1,
    };
    if rule.premise.is_empty() || rule.conclusion.is_empty() || rule.len() != rec.length {
        return Err(Error::parse(context, line, "rule sides inconsistent with its length"));
    }
    Ok(rule)
}

pub fn write_rules<W: Write>(
    writer: W,
    rules: &RuleCollection,
    feature_names: &[String],
    format: RuleFormat,
) -> Result<()> {
    match format {
        RuleFormat::Csv => write_rules_csv(writer, rules, feature_names),
        RuleFormat::Jsonl => write_rules_jsonl(writer, rules, feature_names),
    }
}

pub fn write_rules_csv<W: Write>(writer: W, rules: &RuleCollection, feature_names: &[String]) -> Result<()> {
    if let Some(bad) = feature_names.iter().find(|n| n.contains(ITEM_SEP)) {
        return Err(Error::Dataset(format!(
            "feature name {bad:?} contains '{ITEM_SEP}' and cannot be written as CSV; use JSON lines"
        )));
    }
    let err = |e: csv::Error| Error::Dataset(format!("csv write failed: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER).map_err(err)?;
    let sep = ITEM_SEP.to_string();
    for r in rules.iter() {
        let rec = record(r, feature_names);
        w.write_record([
            rec.premise.join(&sep),
            rec.conclusion.join(&sep),
            rec.rule_type.to_string(),
            rec.level.to_string(),
            rec.cluster_row.to_string(),
            rec.cluster_col.to_string(),
            rec.support_count.to_string(),
            rec.support.to_string(),
            rec.confidence.to_string(),
            rec.length.to_string(),
            rec.duplicate.to_string(),
            rec.echoes_type1.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<rules csv>", e))
}

pub fn write_rules_jsonl<W: Write>(mut writer: W, rules: &RuleCollection, feature_names: &[String]) -> Result<()> {
    for r in rules.iter() {
        let line = serde_json::to_string(&record(r, feature_names))
            .map_err(|e| Error::Dataset(format!("json encode failed: {e}")))?;
        writeln!(writer, "{line}").map_err(|e| Error::io("<rules jsonl>", e))?;
    }
    writer.flush().map_err(|e| Error::io("<rules jsonl>", e))
}

#[derive(Debug, Serialize)]
struct SymbolicRecord<'a> {
    premise: Vec<&'a str>,
    conclusion: Vec<&'a str>,
    support_count: usize,
    support: f64,
    confidence: f64,
    length: usize,
}

/// Baseline rules: `premise,conclusion,support_count,support,confidence,length`.
pub fn write_symbolic_rules<W: Write>(
    mut writer: W,
    rules: &[SymbolicRule],
    num_objects: usize,
    feature_names: &[String],
    format: RuleFormat,
) -> Result<()> {
    let records = rules.iter().map(|r| {
        let side = |s: &[FeatureId]| s.iter().map(|t| feature_names[t.0].as_str()).collect();
        SymbolicRecord {
            premise: side(&r.premise),
            conclusion: side(&r.conclusion),
            support_count: r.support_count,
            support: r.support_count as f64 / num_objects as f64,
            confidence: r.confidence,
            length: r.len(),
        }
    });
    match format {
        RuleFormat::Jsonl => {
            for rec in records {
                let line = serde_json::to_string(&rec)
                    .map_err(|e| Error::Dataset(format!("json encode failed: {e}")))?;
                writeln!(writer, "{line}").map_err(|e| Error::io("<rules jsonl>", e))?;
            }
            writer.flush().map_err(|e| Error::io("<rules jsonl>", e))
        }
        RuleFormat::Csv => {
            if let Some(bad) = feature_names.iter().find(|n| n.contains(ITEM_SEP)) {
                return Err(Error::Dataset(format!(
                    "feature name {bad:?} contains '{ITEM_SEP}' and cannot be written as CSV; use JSON lines"
                )));
            }
            let err = |e: csv::Error| Error::Dataset(format!("csv write failed: {e}"));
            let mut w = csv::Writer::from_writer(writer);
            w.write_record(["premise", "conclusion", "support_count", "support", "confidence", "length"])
                .map_err(err)?;
            let sep = ITEM_SEP.to_string();
            for rec in records {
                w.write_record([
                    rec.premise.join(&sep),
                    rec.conclusion.join(&sep),
                    rec.support_count.to_string(),
                    rec.support.to_string(),
                    rec.confidence.to_string(),
                    rec.length.to_string(),
                ])
                .map_err(err)?;
            }
            w.flush().map_err(|e| Error::io("<rules csv>", e))
        }
    }
}

fn vocabulary(feature_names: &[String]) -> HashMap<&str, usize> {
    feature_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect()
}

pub fn read_rules_csv<R: std::io::Read>(reader: R, feature_names: &[String], context: &str) -> Result<RuleCollection> {
    let vocab = vocabulary(feature_names);
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(context, 1, e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::parse(context, 1, "not a rule file header"));
    }
    let mut rules = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::parse(context, line, e.to_string()))?;
        let num = |i: usize| -> Result<usize> {
            rec[i]
                .parse()
                .map_err(|_| Error::parse(context, line, format!("{}: bad integer", CSV_HEADER[i])))
        };
        let real = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::parse(context, line, format!("{}: bad number", CSV_HEADER[i])))
        };
        let flag = |i: usize| -> Result<bool> {
            rec[i]
                .parse()
                .map_err(|_| Error::parse(context, line, format!("{}: bad flag", CSV_HEADER[i])))
        };
        let side = |i: usize| rec[i].split(ITEM_SEP).filter(|s| !s.is_empty()).map(str::to_owned).collect();
        let parsed = RuleRecord {
            premise: side(0),
            conclusion: side(1),
            rule_type: rec[2].parse().map_err(|_| Error::parse(context, line, "bad rule type"))?,
            level: num(3)?,
            cluster_row: num(4)?,
            cluster_col: num(5)?,
            support_count: num(6)?,
            support: real(7)?,
            confidence: real(8)?,
            length: num(9)?,
            duplicate: flag(10)?,
            echoes_type1: flag(11)?,
        };
        rules.push(resolve(parsed, &vocab, line, context)?);
    }
    Ok(RuleCollection::from_rules(rules))
}

pub fn read_rules_jsonl<R: BufRead>(reader: R, feature_names: &[String], context: &str) -> Result<RuleCollection> {
    let vocab = vocabulary(feature_names);
    let mut rules = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RuleRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(context, line_no, e.to_string()))?;
        rules.push(resolve(rec, &vocab, line_no, context)?);
    }
    Ok(RuleCollection::from_rules(rules))
}

/// Reads either format, choosing JSON lines when the first non-blank byte
/// is `{`. Empty input is an empty JSON lines file.
pub fn read_rules<R: BufRead>(mut reader: R, feature_names: &[String], context: &str) -> Result<RuleCollection> {
    let buf = reader.fill_buf().map_err(|e| Error::parse(context, 1, e.to_string()))?;
    let first = buf.iter().find(|b| !b.is_ascii_whitespace());
    if matches!(first, None | Some(b'{')) {
        read_rules_jsonl(reader, feature_names, context)
    } else {
        read_rules_csv(reader, feature_names, context)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::five_objects;
    use crate::marc::{mine_assignments, MarcParams};
    use crate::som::ClusterAssignment;

    fn fixture_rules() -> (Vec<String>, RuleCollection) {
        let d = five_objects();
        let l = Neuron::new(0, 0);
        let r = Neuron::new(0, 1);
        let a = ClusterAssignment::new(1, 2, vec![l, l, l, r, r]).unwrap();
        let rules = mine_assignments([&a, &a], &d, &MarcParams::default()).unwrap();
        (d.feature_names().to_vec(), rules)
    }

    #[test]
    fn csv_roundtrip() {
        let (names, rules) = fixture_rules();
        let mut buf = Vec::new();
        write_rules_csv(&mut buf, &rules, &names).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "premise,conclusion,type,level,cluster_row,cluster_col,support_count,support,confidence,length,duplicate,echoes_type1\n"
        ));
        assert!(text.contains("t1,t2;t3,I,0,0,0,3,0.6,1,3,false,false\n"), "{text}");
        let back = read_rules(buf.as_slice(), &names, "mem").unwrap();
        assert_eq!(back, rules);
    }

    #[test]
    fn jsonl_roundtrip() {
        let (names, rules) = fixture_rules();
        let mut buf = Vec::new();
        write_rules_jsonl(&mut buf, &rules, &names).unwrap();
        let first = String::from_utf8(buf.clone()).unwrap().lines().next().unwrap().to_owned();
        assert_eq!(
            first,
            r#"{"premise":["t1"],"conclusion":["t2","t3"],"type":"I","level":0,"cluster_row":0,"cluster_col":0,"support_count":3,"support":0.6,"confidence":1.0,"length":3,"duplicate":false,"echoes_type1":false}"#
        );
        let back = read_rules(buf.as_slice(), &names, "mem").unwrap();
        assert_eq!(back, rules);
    }

    #[test]
    fn rejects_unknown_features_and_separator_names() {
        let (names, rules) = fixture_rules();
        let mut buf = Vec::new();
        write_rules_csv(&mut buf, &rules, &names).unwrap();
        let other: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        assert!(read_rules_csv(buf.as_slice(), &other, "mem").is_err());

        let mut bad = names.clone();
        bad[0] = "x;y".into();
        assert!(write_rules_csv(Vec::new(), &rules, &bad).is_err());
    }
}
