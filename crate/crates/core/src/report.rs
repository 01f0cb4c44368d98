//! Report assembly and rendering.
//!
//! Both renderings are pure functions of the bundle: no timestamps, no
//! locale-dependent formatting, and every map is key-sorted, so identical
//! inputs give identical bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{rank_shifts, robustness_summary, RankShift, RobustnessSummary};
use crate::error::{Error, Result};
use crate::ingest::InputFile;
use crate::model::{DatasetId, MetricKind, MetricsTable, ModelId, RankTable};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_sha256: Option<String>,
    pub inputs: Vec<InputFile>,
}

impl Provenance {
    pub fn new(manifest_sha256: Option<String>, inputs: Vec<InputFile>) -> Self {
        Provenance {
            tool_version: TOOL_VERSION.to_string(),
            manifest_sha256,
            inputs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub datasets: Vec<DatasetId>,
    pub metrics: MetricsTable,
    pub ranks: RankTable,
    /// AUROC shifts followed by AUPRC shifts; empty with a single dataset.
    pub shifts: Vec<RankShift>,
    pub robustness: RobustnessSummary,
    pub provenance: Provenance,
}

impl ReportBundle {
    pub fn build(metrics: MetricsTable, provenance: Provenance) -> Result<Self> {
        if metrics.is_empty() {
            return Err(Error::Manifest("no metrics to report".into()));
        }
        if provenance.inputs.is_empty() {
            return Err(Error::Invariant("report has no recorded inputs".into()));
        }
        metrics.ensure_rectangular()?;
        let datasets = metrics.datasets().to_vec();
        let ranks = RankTable::from_metrics(&metrics)?;
        let mut shifts = Vec::new();
        if datasets.len() >= 2 {
            for kind in MetricKind::ALL {
                shifts.extend(rank_shifts(&metrics, kind, &datasets)?);
            }
        }
        let robustness = robustness_summary(&metrics)?;
        Ok(ReportBundle {
            datasets,
            metrics,
            ranks,
            shifts,
            robustness,
            provenance,
        })
    }

    /// Models by AUROC rank on the first dataset, then by id.
    pub fn display_order(&self) -> Vec<ModelId> {
        let first = &self.datasets[0];
        let mut models: Vec<(u32, ModelId)> = self
            .metrics
            .models()
            .iter()
            .map(|m| {
                let r = self.ranks.rank(first, MetricKind::Auroc, m).unwrap_or(u32::MAX);
                (r, m.clone())
            })
            .collect();
        models.sort();
        models.into_iter().map(|(_, m)| m).collect()
    }
}

/// Canonical JSON: sorted keys, shortest round-trip numbers, two-space
/// indentation, trailing LF.
pub fn render_json(bundle: &ReportBundle) -> Result<String> {
    let value = serde_json::to_value(bundle).map_err(|e| Error::Invariant(format!("bundle serialization: {e}")))?;
    canonical_json(&value)
}

/// Re-renders any JSON value in the canonical form used by [`render_json`].
pub fn canonical_json(value: &serde_json::Value) -> Result<String> {
    let mut out = serde_json::to_string_pretty(value).map_err(|e| Error::Invariant(format!("json rendering: {e}")))?;
    out.push('\n');
    Ok(out)
}

pub fn parse_bundle(json: &str) -> Result<ReportBundle> {
    serde_json::from_str(json).map_err(|source| Error::Json {
        path: "<report>".into(),
        source,
    })
}

fn cell(value: f64, best: bool) -> String {
    if best {
        format!("**{value:.3}**")
    } else {
        format!("{value:.3}")
    }
}

pub fn render_markdown(bundle: &ReportBundle) -> String {
    let mut out = String::from("# Fusion evaluation report\n\n## Metrics\n\n| Model |");
    for d in &bundle.datasets {
        for kind in MetricKind::ALL {
            let _ = write!(out, " {} ({d}) |", kind.label());
        }
    }
    out.push_str("\n|---|");
    for _ in 0..bundle.datasets.len() * 2 {
        out.push_str("---:|");
    }
    out.push('\n');
    for model in bundle.display_order() {
        let _ = write!(out, "| {model} |");
        for d in &bundle.datasets {
            for kind in MetricKind::ALL {
                let value = bundle.metrics.value(&model, d, kind).unwrap_or(f64::NAN);
                let best = bundle.ranks.rank(d, kind, &model) == Some(1);
                let _ = write!(out, " {} |", cell(value, best));
            }
        }
        out.push('\n');
    }
    out.push_str(
        "\nBest value per column in bold. Ranks use competition ranking: tied models share the better rank.\n",
    );

    if !bundle.shifts.is_empty() {
        for kind in MetricKind::ALL {
            let _ = write!(out, "\n## {} rank shifts\n\n| Model |", kind.label());
            for d in &bundle.datasets {
                let _ = write!(out, " {d} |");
            }
            out.push_str(" Max shift |\n|---|");
            for _ in 0..=bundle.datasets.len() {
                out.push_str("---:|");
            }
            out.push('\n');
            for s in bundle.shifts.iter().filter(|s| s.metric == kind) {
                let _ = write!(out, "| {} |", s.model);
                for r in &s.ranks {
                    let _ = write!(out, " {r} |");
                }
                let _ = writeln!(out, " {} |", s.max_shift);
            }
        }
    }

    out.push_str("\n## Never worst\n\n");
    if bundle.robustness.never_worst.is_empty() {
        out.push_str("(none)\n");
    } else {
        for m in &bundle.robustness.never_worst {
            let _ = writeln!(out, "- {m}");
        }
    }

    out.push_str("\n## Cross-dataset spread\n\n| Model | AUROC range | AUPRC range |\n|---|---:|---:|\n");
    for (m, r) in &bundle.robustness.ranges {
        let _ = writeln!(out, "| {m} | {:.3} | {:.3} |", r.auroc_range, r.auprc_range);
    }

    out.push_str("\n## Provenance\n\n");
    let _ = writeln!(out, "- tool version: {}", bundle.provenance.tool_version);
    if let Some(d) = &bundle.provenance.manifest_sha256 {
        let _ = writeln!(out, "- manifest sha256: `{d}`");
    }
    for input in &bundle.provenance.inputs {
        let _ = writeln!(out, "- `{}` sha256 `{}`", input.path, input.sha256);
    }
    out
}
