//! Score-file and metrics-table parsing, and joining per-model score files
//! into a [`ScorePanel`].
//!
//! Score files are CSV with the exact header `sample_id,label,score`, label
//! `1` meaning fake. A JSON array of `{sample_id, label, score}` objects is
//! accepted as an equivalent. Metrics tables are CSV with the header
//! `model,dataset,auroc,auprc`.

mod manifest;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::model::{
    is_probability, validate_panel, DatasetId, Label, MetricPair, MetricsTable, ModelId, RawPanel, ScorePanel,
    ScoreRecord,
};

pub use manifest::{
    digest_hex, input_label, load_manifest, read_input, DatasetEntry, FusionSettings, InputFile, LoadedDataset,
    LoadedManifest, RunManifest, StrategyChoice, WeightSource,
};

pub const SCORE_HEADER: &str = "sample_id,label,score";
pub const METRICS_HEADER: &str = "model,dataset,auroc,auprc";

/// One line of a score file.
pub type ScoreFileRow = ScoreRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JoinPolicy {
    /// Every file must cover the same samples.
    #[default]
    Strict,
    /// Keep only samples present in every file.
    DropMissing,
}

impl std::str::FromStr for JoinPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(JoinPolicy::Strict),
            "drop-missing" => Ok(JoinPolicy::DropMissing),
            other => Err(Error::Manifest(format!("unknown join policy `{other}`"))),
        }
    }
}

fn reader(content: &str) -> csv::Reader<&[u8]> {
    let content = content.strip_prefix('\u{feff}').unwrap_or(content);
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(content.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &'static str) -> Result<()> {
    let found = match rdr.headers() {
        Ok(h) => h.iter().collect::<Vec<_>>().join(","),
        Err(_) => String::new(),
    };
    if found != expected {
        return Err(Error::BadHeader { expected, found });
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::MalformedRow {
        line,
        message: e.to_string(),
    }
}

fn parse_label(raw: &str, line: u64) -> Result<Label> {
    match raw {
        "0" => Ok(Label::Real),
        "1" => Ok(Label::Fake),
        _ => Err(Error::BadLabel {
            line,
            value: raw.to_string(),
        }),
    }
}

fn parse_score(raw: &str, line: u64) -> Result<f64> {
    match raw.parse::<f64>() {
        Ok(v) if is_probability(v) => Ok(v),
        _ => Err(Error::BadScore {
            line,
            value: raw.to_string(),
        }),
    }
}

/// Parses a CSV score file.
pub fn parse_score_file(content: &str) -> Result<Vec<ScoreFileRow>> {
    let mut rdr = reader(content);
    check_header(&mut rdr, SCORE_HEADER)?;
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let sample_id = record[0].to_string();
        if sample_id.is_empty() {
            return Err(Error::MalformedRow {
                line,
                message: "empty sample_id".into(),
            });
        }
        let label = parse_label(&record[1], line)?;
        let score = parse_score(&record[2], line)?;
        if !seen.insert(sample_id.clone()) {
            return Err(Error::DuplicateSampleId(sample_id));
        }
        rows.push(ScoreRecord {
            sample_id,
            label,
            score,
        });
    }
    Ok(rows)
}

/// Parses the JSON score-file form: an array of `{sample_id, label, score}`.
pub fn parse_score_json(content: &str) -> Result<Vec<ScoreFileRow>> {
    #[derive(serde::Deserialize)]
    struct Row {
        sample_id: String,
        label: serde_json::Value,
        score: serde_json::Value,
    }
    let raw: Vec<Row> = serde_json::from_str(content).map_err(|e| Error::MalformedRow {
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    let mut rows = Vec::with_capacity(raw.len());
    let mut seen = HashSet::new();
    for (i, r) in raw.into_iter().enumerate() {
        let entry = i as u64 + 1;
        let label = match r.label.as_u64() {
            Some(0) => Label::Real,
            Some(1) => Label::Fake,
            _ => {
                return Err(Error::BadLabel {
                    line: entry,
                    value: r.label.to_string(),
                })
            }
        };
        let score = match r.score.as_f64() {
            Some(v) if is_probability(v) => v,
            _ => {
                return Err(Error::BadScore {
                    line: entry,
                    value: r.score.to_string(),
                })
            }
        };
        if !seen.insert(r.sample_id.clone()) {
            return Err(Error::DuplicateSampleId(r.sample_id));
        }
        rows.push(ScoreRecord {
            sample_id: r.sample_id,
            label,
            score,
        });
    }
    Ok(rows)
}

/// Writes rows in the canonical CSV score format (LF line endings).
pub fn serialize_score_file(rows: &[ScoreFileRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["sample_id", "label", "score"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([r.sample_id.as_str(), &r.label.as_u8().to_string(), &r.score.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Rows of one model in a panel, in panel sample order.
pub fn panel_rows(panel: &ScorePanel, model_index: usize) -> Vec<ScoreFileRow> {
    panel
        .sample_ids()
        .iter()
        .zip(panel.labels())
        .zip(panel.row(model_index))
        .map(|((id, label), score)| ScoreRecord {
            sample_id: id.clone(),
            label: *label,
            score: *score,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinOutcome {
    pub panel: ScorePanel,
    /// Samples present in some file but not in all of them.
    pub dropped: usize,
}

/// Joins per-model score rows into one panel whose samples are sorted by id.
pub fn join_panels(
    files: &[(ModelId, Vec<ScoreFileRow>)],
    dataset: DatasetId,
    policy: JoinPolicy,
) -> Result<JoinOutcome> {
    if files.len() < 2 {
        return Err(Error::TooFewModels(files.len()));
    }
    let mut lookup: Vec<BTreeMap<&str, &ScoreRecord>> = Vec::with_capacity(files.len());
    for (_, rows) in files {
        let mut map = BTreeMap::new();
        for r in rows {
            if map.insert(r.sample_id.as_str(), r).is_some() {
                return Err(Error::DuplicateSampleId(r.sample_id.clone()));
            }
        }
        lookup.push(map);
    }

    let mut labels: BTreeMap<&str, Label> = BTreeMap::new();
    for map in &lookup {
        for (id, r) in map {
            if let Some(prev) = labels.insert(id, r.label) {
                if prev != r.label {
                    return Err(Error::LabelConflict(id.to_string()));
                }
            }
        }
    }

    let keys = |m: &BTreeMap<&str, &ScoreRecord>| -> BTreeSet<String> { m.keys().map(|k| k.to_string()).collect() };
    let first = keys(&lookup[0]);
    if policy == JoinPolicy::Strict {
        for (i, map) in lookup.iter().enumerate().skip(1) {
            if keys(map) != first {
                return Err(Error::SampleSetMismatch {
                    first: files[0].0.to_string(),
                    other: files[i].0.to_string(),
                });
            }
        }
    }

    let kept: Vec<String> = first
        .into_iter()
        .filter(|id| lookup.iter().all(|m| m.contains_key(id.as_str())))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let dropped = labels.len() - kept.len();

    let raw = RawPanel {
        dataset,
        models: files.iter().map(|(m, _)| m.clone()).collect(),
        labels: kept.iter().map(|id| labels[id.as_str()]).collect(),
        scores: lookup
            .iter()
            .map(|m| kept.iter().map(|id| Some(m[id.as_str()].score)).collect())
            .collect(),
        sample_ids: kept,
    };
    Ok(JoinOutcome {
        panel: validate_panel(raw)?,
        dropped,
    })
}

/// Parses a `model,dataset,auroc,auprc` table.
pub fn parse_metrics_table(content: &str) -> Result<MetricsTable> {
    let mut rdr = reader(content);
    check_header(&mut rdr, METRICS_HEADER)?;
    let mut table = MetricsTable::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let id_err = |e: Error| Error::MalformedRow {
            line,
            message: e.to_string(),
        };
        let model = ModelId::new(&record[0]).map_err(id_err)?;
        let dataset = DatasetId::new(&record[1]).map_err(id_err)?;
        let mut values = [0.0; 2];
        for (slot, raw) in values.iter_mut().zip([&record[2], &record[3]]) {
            let v: f64 = raw.parse().map_err(|_| Error::MalformedRow {
                line,
                message: format!("`{raw}` is not a number"),
            })?;
            if !is_probability(v) {
                return Err(Error::ValueOutOfRange {
                    location: format!("line {line}"),
                    value: v,
                });
            }
            *slot = v;
        }
        table.insert(
            model,
            dataset,
            MetricPair {
                auroc: values[0],
                auprc: values[1],
            },
        )?;
    }
    Ok(table)
}

/// Writes a metrics table in the format read by [`parse_metrics_table`].
pub fn serialize_metrics_table(table: &MetricsTable) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["model", "dataset", "auroc", "auprc"])
        .expect("in-memory write");
    for (m, d, p) in table.iter() {
        w.write_record([m.as_str(), d.as_str(), &p.auroc.to_string(), &p.auprc.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(s: &str) -> ModelId {
        ModelId::new(s).unwrap()
    }

    fn rows(spec: &[(&str, u8, f64)]) -> Vec<ScoreFileRow> {
        spec.iter()
            .map(|&(id, l, s)| ScoreRecord {
                sample_id: id.into(),
                label: Label::from_u8(l).unwrap(),
                score: s,
            })
            .collect()
    }

    #[test]
    fn minimal_file() {
        let r = parse_score_file("sample_id,label,score\na,1,0.9\nb,0,0.1").unwrap();
        assert_eq!(r, rows(&[("a", 1, 0.9), ("b", 0, 0.1)]));
    }

    #[test]
    fn crlf_and_blank_lines() {
        let r = parse_score_file("sample_id,label,score\r\na,1,0.9\r\n\r\nb,0,0.1\r\n").unwrap();
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn bad_rows() {
        assert!(matches!(
            parse_score_file("sample_id,label,score\na,2,0.5"),
            Err(Error::BadLabel { line: 2, .. })
        ));
        assert!(matches!(
            parse_score_file("sample_id,label,score\na,1,NaN"),
            Err(Error::BadScore { line: 2, .. })
        ));
        assert!(matches!(
            parse_score_file("sample_id,label,score\na,1,1.5"),
            Err(Error::BadScore { .. })
        ));
        assert!(matches!(
            parse_score_file("sample_id,label,score\na,1,0,5"),
            Err(Error::MalformedRow { .. })
        ));
        assert!(matches!(
            parse_score_file("sample_id,label,score\na,1,0.5\na,0,0.2"),
            Err(Error::DuplicateSampleId(id)) if id == "a"
        ));
    }

    #[test]
    fn bad_header() {
        assert!(matches!(
            parse_score_file("id,label,score\na,1,0.5"),
            Err(Error::BadHeader { .. })
        ));
        assert!(matches!(parse_score_file(""), Err(Error::BadHeader { .. })));
    }

    #[test]
    fn json_equivalent() {
        let r =
            parse_score_json(r#"[{"sample_id":"a","label":1,"score":0.9},{"sample_id":"b","label":0,"score":0.1}]"#)
                .unwrap();
        assert_eq!(r, rows(&[("a", 1, 0.9), ("b", 0, 0.1)]));
        assert!(matches!(
            parse_score_json(r#"[{"sample_id":"a","label":2,"score":0.9}]"#),
            Err(Error::BadLabel { .. })
        ));
    }

    #[test]
    fn strict_join_identical_sets() {
        let a = rows(&[("a", 1, 0.9), ("b", 0, 0.1), ("c", 1, 0.7), ("d", 0, 0.3)]);
        let b = rows(&[("d", 0, 0.2), ("c", 1, 0.6), ("b", 0, 0.4), ("a", 1, 0.8)]);
        let out = join_panels(
            &[(m("x"), a), (m("y"), b)],
            DatasetId::new("d").unwrap(),
            JoinPolicy::Strict,
        )
        .unwrap();
        assert_eq!(out.panel.n_models(), 2);
        assert_eq!(out.panel.n_samples(), 4);
        assert_eq!(out.dropped, 0);
        assert_eq!(out.panel.sample_ids(), &["a", "b", "c", "d"]);
        assert_eq!(out.panel.row(1), &[0.8, 0.4, 0.6, 0.2]);
    }

    #[test]
    fn mismatched_sets() {
        let a = rows(&[("a", 1, 0.9), ("b", 0, 0.1), ("c", 1, 0.7)]);
        let b = rows(&[("a", 1, 0.8), ("b", 0, 0.4), ("d", 0, 0.2)]);
        let files = [(m("x"), a), (m("y"), b)];
        let ds = DatasetId::new("d").unwrap();
        assert!(matches!(
            join_panels(&files, ds.clone(), JoinPolicy::Strict),
            Err(Error::SampleSetMismatch { .. })
        ));
        let out = join_panels(&files, ds, JoinPolicy::DropMissing).unwrap();
        assert_eq!(out.panel.sample_ids(), &["a", "b"]);
        assert_eq!(out.dropped, 2);
    }

    #[test]
    fn label_conflict_is_fatal_in_both_modes() {
        let a = rows(&[("a", 1, 0.9), ("b", 0, 0.1), ("c", 1, 0.5)]);
        let b = rows(&[("a", 1, 0.8), ("b", 1, 0.4)]);
        let files = [(m("x"), a), (m("y"), b)];
        for policy in [JoinPolicy::Strict, JoinPolicy::DropMissing] {
            assert!(matches!(
                join_panels(&files, DatasetId::new("d").unwrap(), policy),
                Err(Error::LabelConflict(id)) if id == "b"
            ));
        }
    }

    #[test]
    fn disjoint_files() {
        let files = [(m("x"), rows(&[("a", 1, 0.9)])), (m("y"), rows(&[("b", 0, 0.9)]))];
        assert!(matches!(
            join_panels(&files, DatasetId::new("d").unwrap(), JoinPolicy::DropMissing),
            Err(Error::EmptyIntersection)
        ));
    }

    #[test]
    fn metrics_table_rows() {
        let t = parse_metrics_table("model,dataset,auroc,auprc\ncore,uadfv,0.961,0.964\nucf,celeb-df-v2,0.772,0.861\n")
            .unwrap();
        let core = t.get(&m("core"), &DatasetId::new("uadfv").unwrap()).unwrap();
        assert_eq!((core.auroc, core.auprc), (0.961, 0.964));
        let ucf = t.get(&m("ucf"), &DatasetId::new("celeb-df-v2").unwrap()).unwrap();
        assert_eq!((ucf.auroc, ucf.auprc), (0.772, 0.861));
        assert!(matches!(
            parse_metrics_table("model,dataset,auroc,auprc\nx,d,1.2,0.5"),
            Err(Error::ValueOutOfRange { .. })
        ));
        assert!(matches!(
            parse_metrics_table("model,dataset,auroc,auprc\nx,d,0.5,0.5\nx,d,0.6,0.6"),
            Err(Error::DuplicateEntry { .. })
        ));
    }

    #[test]
    fn metrics_table_round_trip() {
        let src = "model,dataset,auroc,auprc\ncore,uadfv,0.961,0.964\ncore,celeb,0.741,0.829\n";
        let t = parse_metrics_table(src).unwrap();
        assert_eq!(serialize_metrics_table(&t), src);
    }

    fn score_rows() -> impl Strategy<Value = Vec<ScoreFileRow>> {
        prop::collection::btree_map("[a-z0-9_,\" -]{1,8}", (any::<bool>(), 0.0f64..=1.0), 0..30).prop_map(|m| {
            m.into_iter()
                .map(|(id, (fake, score))| ScoreRecord {
                    sample_id: id,
                    label: if fake { Label::Fake } else { Label::Real },
                    score,
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn score_file_round_trips(rows in score_rows()) {
            prop_assume!(rows.iter().all(|r| !r.sample_id.trim().is_empty()));
            let text = serialize_score_file(&rows);
            prop_assert_eq!(parse_score_file(&text).unwrap(), rows);
        }

        #[test]
        fn drop_missing_keeps_exact_intersection(
            a in prop::collection::btree_set(0u8..30, 1..30),
            b in prop::collection::btree_set(0u8..30, 1..30),
            c in prop::collection::btree_set(0u8..30, 1..30),
        ) {
            let make = |set: &BTreeSet<u8>| -> Vec<ScoreFileRow> {
                set.iter()
                    .map(|i| ScoreRecord { sample_id: format!("{i:02}"), label: Label::from_u8(i % 2).unwrap(), score: 0.5 })
                    .collect()
            };
            let files = [(m("a"), make(&a)), (m("b"), make(&b)), (m("c"), make(&c))];
            let expected: BTreeSet<u8> = a.iter().filter(|i| b.contains(i) && c.contains(i)).cloned().collect();
            let has_both = expected.iter().any(|i| i % 2 == 0) && expected.iter().any(|i| i % 2 == 1);
            let result = join_panels(&files, DatasetId::new("d").unwrap(), JoinPolicy::DropMissing);
            if has_both {
                let out = result.unwrap();
                let got: Vec<String> = expected.iter().map(|i| format!("{i:02}")).collect();
                prop_assert_eq!(out.panel.sample_ids(), got.as_slice());
                let union: BTreeSet<u8> = a.union(&b).cloned().collect::<BTreeSet<_>>().union(&c).cloned().collect();
                prop_assert_eq!(out.dropped, union.len() - expected.len());
            } else {
                prop_assert!(result.is_err());
            }
        }

        #[test]
        fn strict_join_has_no_holes(rows in score_rows()) {
            let mut rows = rows;
            rows.retain(|r| !r.sample_id.trim().is_empty());
            prop_assume!(rows.iter().any(|r| r.label.is_fake()) && rows.iter().any(|r| !r.label.is_fake()));
            let other: Vec<ScoreFileRow> = rows.iter().rev().map(|r| ScoreRecord { score: 1.0 - r.score, ..r.clone() }).collect();
            let out = join_panels(&[(m("a"), rows.clone()), (m("b"), other)], DatasetId::new("d").unwrap(), JoinPolicy::Strict).unwrap();
            prop_assert_eq!(out.panel.n_samples(), rows.len());
        }
    }
}
