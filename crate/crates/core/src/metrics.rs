//! Ranking metrics for binary scores: AUROC (Mann-Whitney, ties count half),
//! tie-block average precision, thresholded accuracy, and curve vertices.
//!
//! All metrics work on "tie blocks": samples grouped by identical score and
//! visited from the highest score down. Both metrics depend only on the block
//! structure, so the order of samples inside a block never matters.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DatasetId, Label, MetricPair, MetricsTable, ModelId, ScorePanel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub auroc: f64,
    pub auprc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl EvaluationResult {
    pub fn pair(&self) -> MetricPair {
        MetricPair {
            auroc: self.auroc,
            auprc: self.auprc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Roc,
    Pr,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Roc => "roc",
            CurveKind::Pr => "pr",
        }
    }
}

/// ROC points are (FPR, TPR); PR points are (recall, precision).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoints {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
}

impl CurvePoints {
    /// Trapezoidal area, the ROC convention.
    pub fn trapezoid_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum()
    }

    /// Right-endpoint step area, the average-precision convention.
    pub fn step_area(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1].0 - w[0].0) * w[1].1).sum()
    }

    /// `x,y` CSV preceded by a `# kind=… model=… dataset=…` comment line.
    pub fn to_csv(&self, model: &ModelId, dataset: &DatasetId) -> String {
        let mut out = format!("# kind={} model={model} dataset={dataset}\nx,y\n", self.kind.as_str());
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x},{y}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Block {
    pos: u64,
    neg: u64,
}

fn class_counts(labels: &[Label], scores: &[f64]) -> Result<(u64, u64)> {
    if labels.len() != scores.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            found: scores.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore(i));
    }
    let pos = labels.iter().filter(|l| l.is_fake()).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClassDataset(String::new()));
    }
    Ok((pos, neg))
}

/// Groups samples by score, highest first.
fn tie_blocks(labels: &[Label], scores: &[f64]) -> Vec<Block> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let mut blocks: Vec<Block> = Vec::new();
    let mut last: Option<f64> = None;
    for i in order {
        if last != Some(scores[i]) {
            blocks.push(Block { pos: 0, neg: 0 });
            last = Some(scores[i]);
        }
        let b = blocks.last_mut().expect("block pushed above");
        if labels[i].is_fake() {
            b.pos += 1;
        } else {
            b.neg += 1;
        }
    }
    blocks
}

/// Probability that a random positive outscores a random negative, with
/// ties counted as one half.
pub fn auroc(labels: &[Label], scores: &[f64]) -> Result<f64> {
    let (n_pos, n_neg) = class_counts(labels, scores)?;
    // Twice the U statistic, kept integral.
    let mut doubled: u128 = 0;
    let mut neg_at_or_above: u64 = 0;
    for b in tie_blocks(labels, scores) {
        neg_at_or_above += b.neg;
        let neg_below = n_neg - neg_at_or_above;
        doubled += 2 * u128::from(b.pos) * u128::from(neg_below) + u128::from(b.pos) * u128::from(b.neg);
    }
    Ok(doubled as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

/// Non-interpolated average precision over tie blocks.
pub fn auprc(labels: &[Label], scores: &[f64]) -> Result<f64> {
    let (n_pos, _) = class_counts(labels, scores)?;
    let mut ap = 0.0;
    let (mut tp, mut fp) = (0u64, 0u64);
    for b in tie_blocks(labels, scores) {
        tp += b.pos;
        fp += b.neg;
        if b.pos > 0 {
            ap += (b.pos as f64 / n_pos as f64) * (tp as f64 / (tp + fp) as f64);
        }
    }
    Ok(ap)
}

/// Fraction of samples whose decision `score >= threshold` matches the label.
pub fn accuracy(labels: &[Label], scores: &[f64], threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    if labels.len() != scores.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            found: scores.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::ShapeMismatch("accuracy of an empty sample".into()));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore(i));
    }
    let correct = labels
        .iter()
        .zip(scores)
        .filter(|(l, s)| (**s >= threshold) == l.is_fake())
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Curve vertices.
///
/// ROC: starts at (0,0), ends at (1,1), one vertex per threshold at which the
/// curve changes direction (collinear intermediate points are dropped, which
/// leaves the trapezoidal area unchanged). PR: one point per tie block,
/// preceded by (0, 1); its step area is the average precision.
pub fn curve_points(labels: &[Label], scores: &[f64], kind: CurveKind) -> Result<CurvePoints> {
    let (n_pos, n_neg) = class_counts(labels, scores)?;
    let blocks = tie_blocks(labels, scores);
    let points = match kind {
        CurveKind::Roc => {
            let mut counts: Vec<(u64, u64)> = vec![(0, 0)];
            let (mut fp, mut tp) = (0u64, 0u64);
            for b in &blocks {
                fp += b.neg;
                tp += b.pos;
                let next = (fp, tp);
                if counts.len() >= 2 {
                    let a = counts[counts.len() - 2];
                    let m = counts[counts.len() - 1];
                    if collinear(a, m, next) {
                        counts.pop();
                    }
                }
                counts.push(next);
            }
            counts
                .into_iter()
                .map(|(fp, tp)| (fp as f64 / n_neg as f64, tp as f64 / n_pos as f64))
                .collect()
        }
        CurveKind::Pr => {
            let mut pts = vec![(0.0, 1.0)];
            let (mut tp, mut fp) = (0u64, 0u64);
            for b in &blocks {
                tp += b.pos;
                fp += b.neg;
                pts.push((tp as f64 / n_pos as f64, tp as f64 / (tp + fp) as f64));
            }
            pts
        }
    };
    Ok(CurvePoints { kind, points })
}

fn collinear(a: (u64, u64), b: (u64, u64), c: (u64, u64)) -> bool {
    let (ax, ay) = (a.0 as i128, a.1 as i128);
    let (bx, by) = (b.0 as i128, b.1 as i128);
    let (cx, cy) = (c.0 as i128, c.1 as i128);
    (bx - ax) * (cy - ay) == (by - ay) * (cx - ax)
}

/// AUROC and AUPRC with class counts.
pub fn evaluate(labels: &[Label], scores: &[f64]) -> Result<EvaluationResult> {
    let (n_pos, n_neg) = class_counts(labels, scores)?;
    Ok(EvaluationResult {
        auroc: auroc(labels, scores)?,
        auprc: auprc(labels, scores)?,
        n_pos: n_pos as usize,
        n_neg: n_neg as usize,
    })
}

/// One result per model row, in panel order.
pub fn evaluate_panel(panel: &ScorePanel) -> Result<Vec<(ModelId, EvaluationResult)>> {
    panel
        .rows()
        .map(|(model, row)| {
            evaluate(panel.labels(), row)
                .map(|r| (model.clone(), r))
                .map_err(|e| match e {
                    Error::SingleClassDataset(_) => Error::SingleClassDataset(panel.dataset().to_string()),
                    other => other,
                })
        })
        .collect()
}

/// Evaluates each panel and collects the results into one table.
pub fn evaluate_panels<'a>(panels: impl IntoIterator<Item = &'a ScorePanel>) -> Result<MetricsTable> {
    let mut table = MetricsTable::new();
    for panel in panels {
        for (model, result) in evaluate_panel(panel)? {
            table.insert(model, panel.dataset().clone(), result.pair())?;
        }
    }
    Ok(table)
}
