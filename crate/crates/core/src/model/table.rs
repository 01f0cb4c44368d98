use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DatasetId, ModelId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Auroc,
    Auprc,
}

impl MetricKind {
    pub const ALL: [MetricKind; 2] = [MetricKind::Auroc, MetricKind::Auprc];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Auroc => "auroc",
            MetricKind::Auprc => "auprc",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Auroc => "AUROC",
            MetricKind::Auprc => "AUPRC",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auroc" => Ok(MetricKind::Auroc),
            "auprc" => Ok(MetricKind::Auprc),
            other => Err(Error::Manifest(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricPair {
    pub auroc: f64,
    pub auprc: f64,
}

impl MetricPair {
    pub fn get(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::Auroc => self.auroc,
            MetricKind::Auprc => self.auprc,
        }
    }
}

/// (model, dataset) → {AUROC, AUPRC}. Models and datasets keep the order in
/// which they were first inserted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsTable {
    models: Vec<ModelId>,
    datasets: Vec<DatasetId>,
    entries: BTreeMap<(ModelId, DatasetId), MetricPair>,
}

#[derive(Serialize, Deserialize)]
struct MetricsRow {
    model: ModelId,
    dataset: DatasetId,
    auroc: f64,
    auprc: f64,
}

impl MetricsTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, model: ModelId, dataset: DatasetId, pair: MetricPair) -> Result<()> {
        for value in [pair.auroc, pair.auprc] {
            if !super::is_probability(value) {
                return Err(Error::ValueOutOfRange {
                    location: format!("{model}/{dataset}"),
                    value,
                });
            }
        }
        let key = (model, dataset);
        if self.entries.contains_key(&key) {
            return Err(Error::DuplicateEntry {
                model: key.0.to_string(),
                dataset: key.1.to_string(),
            });
        }
        if !self.models.contains(&key.0) {
            self.models.push(key.0.clone());
        }
        if !self.datasets.contains(&key.1) {
            self.datasets.push(key.1.clone());
        }
        self.entries.insert(key, pair);
        Ok(())
    }

    pub fn models(&self) -> &[ModelId] {
        &self.models
    }

    pub fn datasets(&self) -> &[DatasetId] {
        &self.datasets
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, model: &ModelId, dataset: &DatasetId) -> Option<&MetricPair> {
        self.entries.get(&(model.clone(), dataset.clone()))
    }

    pub fn value(&self, model: &ModelId, dataset: &DatasetId, kind: MetricKind) -> Result<f64> {
        self.get(model, dataset)
            .map(|p| p.get(kind))
            .ok_or_else(|| Error::MissingEntry {
                model: model.to_string(),
                dataset: dataset.to_string(),
            })
    }

    /// Every model's value for one (dataset, metric) column, in model order.
    pub fn column(&self, dataset: &DatasetId, kind: MetricKind) -> Result<Vec<(ModelId, f64)>> {
        if !self.datasets.contains(dataset) {
            return Err(Error::UnknownDataset(dataset.to_string()));
        }
        self.models
            .iter()
            .map(|m| Ok((m.clone(), self.value(m, dataset, kind)?)))
            .collect()
    }

    /// Fails with the first missing (model, dataset) pair, scanning in table order.
    pub fn ensure_rectangular(&self) -> Result<()> {
        for m in &self.models {
            for d in &self.datasets {
                if self.get(m, d).is_none() {
                    return Err(Error::MissingEntry {
                        model: m.to_string(),
                        dataset: d.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Entries in model order, then dataset order.
    pub fn iter(&self) -> impl Iterator<Item = (&ModelId, &DatasetId, &MetricPair)> {
        self.models.iter().flat_map(move |m| {
            self.datasets
                .iter()
                .filter_map(move |d| self.entries.get(&(m.clone(), d.clone())).map(|p| (m, d, p)))
        })
    }
}

impl Serialize for MetricsTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<MetricsRow> = self
            .iter()
            .map(|(m, d, p)| MetricsRow {
                model: m.clone(),
                dataset: d.clone(),
                auroc: p.auroc,
                auprc: p.auprc,
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MetricsTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<MetricsRow>::deserialize(d)?;
        let mut table = MetricsTable::new();
        for r in rows {
            table
                .insert(
                    r.model,
                    r.dataset,
                    MetricPair {
                        auroc: r.auroc,
                        auprc: r.auprc,
                    },
                )
                .map_err(serde::de::Error::custom)?;
        }
        Ok(table)
    }
}

/// Comparison key used for rank ties: the value rounded to 12 significant
/// digits (half-to-even on the exact binary value).
pub fn rank_key(value: f64) -> f64 {
    format!("{value:.11e}").parse().expect("formatted float parses")
}

/// Competition ("1,2,2,4") ranks where larger values rank better.
pub fn competition_ranks(values: &[f64]) -> Vec<u32> {
    let keys: Vec<f64> = values.iter().copied().map(rank_key).collect();
    keys.iter()
        .map(|k| 1 + keys.iter().filter(|other| *other > k).count() as u32)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    CompetitionMin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankColumn {
    pub dataset: DatasetId,
    pub metric: MetricKind,
    /// Model order follows the metrics table.
    pub ranks: Vec<(ModelId, u32)>,
}

/// Per-(dataset, metric) ranks for every model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub tie_policy: TiePolicy,
    pub columns: Vec<RankColumn>,
}

impl RankTable {
    /// Ranks every (dataset, metric) column of a rectangular table.
    pub fn from_metrics(table: &MetricsTable) -> Result<Self> {
        let mut columns = Vec::new();
        for d in table.datasets() {
            for kind in MetricKind::ALL {
                let column = table.column(d, kind)?;
                let values: Vec<f64> = column.iter().map(|c| c.1).collect();
                let ranks = competition_ranks(&values);
                columns.push(RankColumn {
                    dataset: d.clone(),
                    metric: kind,
                    ranks: column.into_iter().map(|c| c.0).zip(ranks).collect(),
                });
            }
        }
        Ok(RankTable {
            tie_policy: TiePolicy::CompetitionMin,
            columns,
        })
    }

    pub fn column(&self, dataset: &DatasetId, metric: MetricKind) -> Option<&RankColumn> {
        self.columns
            .iter()
            .find(|c| &c.dataset == dataset && c.metric == metric)
    }

    pub fn rank(&self, dataset: &DatasetId, metric: MetricKind, model: &ModelId) -> Option<u32> {
        self.column(dataset, metric)?
            .ranks
            .iter()
            .find(|(m, _)| m == model)
            .map(|(_, r)| *r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(s: &str) -> ModelId {
        ModelId::new(s).unwrap()
    }

    fn d(s: &str) -> DatasetId {
        DatasetId::new(s).unwrap()
    }

    #[test]
    fn competition_ranking_skips_after_ties() {
        assert_eq!(competition_ranks(&[0.9, 0.8, 0.8, 0.7]), vec![1, 2, 2, 4]);
        assert_eq!(competition_ranks(&[0.5, 0.5, 0.5]), vec![1, 1, 1]);
        assert_eq!(competition_ranks(&[0.1, 0.3, 0.2]), vec![3, 1, 2]);
    }

    #[test]
    fn rank_key_merges_sub_twelve_digit_noise() {
        let a = 0.1 + 0.2;
        let b = 0.3;
        assert_ne!(a, b);
        assert_eq!(rank_key(a), rank_key(b));
        assert_eq!(competition_ranks(&[a, b]), vec![1, 1]);
        assert_ne!(rank_key(0.958), rank_key(0.958 + 1e-9));
    }

    #[test]
    fn insert_rejects_duplicates_and_range() {
        let mut t = MetricsTable::new();
        let p = MetricPair { auroc: 0.9, auprc: 0.8 };
        t.insert(m("a"), d("x"), p).unwrap();
        assert!(matches!(t.insert(m("a"), d("x"), p), Err(Error::DuplicateEntry { .. })));
        let bad = MetricPair { auroc: 1.2, auprc: 0.5 };
        assert!(matches!(
            t.insert(m("b"), d("x"), bad),
            Err(Error::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn rectangular_check_names_hole() {
        let mut t = MetricsTable::new();
        let p = MetricPair { auroc: 0.9, auprc: 0.8 };
        t.insert(m("a"), d("x"), p).unwrap();
        t.insert(m("a"), d("y"), p).unwrap();
        t.insert(m("b"), d("x"), p).unwrap();
        match t.ensure_rectangular() {
            Err(Error::MissingEntry { model, dataset }) => {
                assert_eq!((model.as_str(), dataset.as_str()), ("b", "y"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn serde_preserves_order() {
        let mut t = MetricsTable::new();
        t.insert(m("z"), d("y"), MetricPair { auroc: 0.5, auprc: 0.4 }).unwrap();
        t.insert(m("a"), d("y"), MetricPair { auroc: 0.6, auprc: 0.7 }).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: MetricsTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.models()[0].as_str(), "z");
    }

    proptest! {
        #[test]
        fn max_is_rank_one_and_equal_values_share_rank(
            values in prop::collection::vec(prop::sample::select(vec![0.1, 0.25, 0.5, 0.75, 0.958, 1.0]), 1..20)
        ) {
            let ranks = competition_ranks(&values);
            let max = values.iter().cloned().fold(f64::MIN, f64::max);
            for (v, r) in values.iter().zip(&ranks) {
                if *v == max {
                    prop_assert_eq!(*r, 1);
                }
            }
            for i in 0..values.len() {
                for j in 0..values.len() {
                    if values[i] == values[j] {
                        prop_assert_eq!(ranks[i], ranks[j]);
                    } else if values[i] > values[j] {
                        prop_assert!(ranks[i] < ranks[j]);
                    }
                }
            }
        }
    }
}
