//! Cross-dataset rank analysis: per-column ranks, rank shifts across datasets
//! (bump-chart data) and the "never worst" robustness summary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{competition_ranks, rank_key, DatasetId, MetricKind, MetricsTable, ModelId};

/// Competition-min ranks of every model for one (dataset, metric) column,
/// higher values ranking better. Output follows the table's model order.
pub fn rank_models(table: &MetricsTable, dataset: &DatasetId, metric: MetricKind) -> Result<Vec<(ModelId, u32)>> {
    let column = table.column(dataset, metric)?;
    let values: Vec<f64> = column.iter().map(|c| c.1).collect();
    let ranks = competition_ranks(&values);
    Ok(column.into_iter().map(|c| c.0).zip(ranks).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankShift {
    pub model: ModelId,
    pub metric: MetricKind,
    /// One rank per dataset, in the requested dataset order.
    pub ranks: Vec<u32>,
    pub max_shift: u32,
}

/// Rank trajectory of every model across `datasets`, sorted by rank on the
/// first dataset and then by model id.
pub fn rank_shifts(table: &MetricsTable, metric: MetricKind, datasets: &[DatasetId]) -> Result<Vec<RankShift>> {
    if datasets.len() < 2 {
        return Err(Error::TooFewDatasets {
            min: 2,
            found: datasets.len(),
        });
    }
    let columns = datasets
        .iter()
        .map(|d| rank_models(table, d, metric))
        .collect::<Result<Vec<_>>>()?;
    let mut shifts: Vec<RankShift> = table
        .models()
        .iter()
        .enumerate()
        .map(|(i, model)| {
            let ranks: Vec<u32> = columns.iter().map(|c| c[i].1).collect();
            let max = *ranks.iter().max().expect("at least two datasets");
            let min = *ranks.iter().min().expect("at least two datasets");
            RankShift {
                model: model.clone(),
                metric,
                ranks,
                max_shift: max - min,
            }
        })
        .collect();
    shifts.sort_by(|a, b| a.ranks[0].cmp(&b.ranks[0]).then_with(|| a.model.cmp(&b.model)));
    Ok(shifts)
}

/// Bump-chart rows: `model,metric,dataset,rank`.
pub fn bump_chart_csv(shifts: &[RankShift], datasets: &[DatasetId]) -> String {
    let mut out = String::from("model,metric,dataset,rank\n");
    for s in shifts {
        for (d, r) in datasets.iter().zip(&s.ranks) {
            let _ = writeln!(out, "{},{},{},{}", s.model, s.metric, d, r);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRange {
    pub auroc_range: f64,
    pub auprc_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessSummary {
    pub never_worst: BTreeSet<ModelId>,
    /// max − min of each metric across datasets.
    pub ranges: BTreeMap<ModelId, MetricRange>,
}

/// Models sharing the minimum value of one column (ties included).
pub fn worst_models(table: &MetricsTable, dataset: &DatasetId, metric: MetricKind) -> Result<Vec<ModelId>> {
    let column = table.column(dataset, metric)?;
    let min = column.iter().map(|c| rank_key(c.1)).fold(f64::INFINITY, f64::min);
    Ok(column
        .into_iter()
        .filter(|c| rank_key(c.1) == min)
        .map(|c| c.0)
        .collect())
}

pub fn robustness_summary(table: &MetricsTable) -> Result<RobustnessSummary> {
    table.ensure_rectangular()?;
    let mut ever_worst = BTreeSet::new();
    for d in table.datasets() {
        for metric in MetricKind::ALL {
            ever_worst.extend(worst_models(table, d, metric)?);
        }
    }
    let never_worst = table
        .models()
        .iter()
        .filter(|m| !ever_worst.contains(*m))
        .cloned()
        .collect();

    let mut ranges = BTreeMap::new();
    for m in table.models() {
        let spread = |kind: MetricKind| -> Result<f64> {
            let values = table
                .datasets()
                .iter()
                .map(|d| table.value(m, d, kind))
                .collect::<Result<Vec<f64>>>()?;
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(hi - lo)
        };
        ranges.insert(
            m.clone(),
            MetricRange {
                auroc_range: spread(MetricKind::Auroc)?,
                auprc_range: spread(MetricKind::Auprc)?,
            },
        );
    }
    Ok(RobustnessSummary { never_worst, ranges })
}
