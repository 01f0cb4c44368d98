use std::collections::HashSet;

use super::{is_probability, DatasetId, Label, ModelId};
use crate::error::{Error, Result};

/// A panel as assembled from files, before any invariant is checked.
/// `scores[m][s]` is model `m`'s score for sample `s`; `None` is a hole.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPanel {
    pub dataset: DatasetId,
    pub models: Vec<ModelId>,
    pub sample_ids: Vec<String>,
    pub labels: Vec<Label>,
    pub scores: Vec<Vec<Option<f64>>>,
}

/// Models × samples score matrix for one dataset.
///
/// Only obtainable through [`validate_panel`], so every cell is present, every
/// score lies in `[0, 1]`, sample ids are unique and both classes occur.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorePanel {
    dataset: DatasetId,
    models: Vec<ModelId>,
    sample_ids: Vec<String>,
    labels: Vec<Label>,
    scores: Vec<Vec<f64>>,
}

impl ScorePanel {
    /// Builds and validates a panel from complete rows.
    pub fn new(
        dataset: DatasetId,
        models: Vec<ModelId>,
        sample_ids: Vec<String>,
        labels: Vec<Label>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        validate_panel(RawPanel {
            dataset,
            models,
            sample_ids,
            labels,
            scores: rows
                .into_iter()
                .map(|row| row.into_iter().map(Some).collect())
                .collect(),
        })
    }

    pub fn dataset(&self) -> &DatasetId {
        &self.dataset
    }

    pub fn models(&self) -> &[ModelId] {
        &self.models
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    /// Scores of the model at `index`, in sample order.
    pub fn row(&self, index: usize) -> &[f64] {
        &self.scores[index]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&ModelId, &[f64])> {
        self.models.iter().zip(self.scores.iter().map(Vec::as_slice))
    }

    pub fn row_by_id(&self, model: &ModelId) -> Option<&[f64]> {
        self.models
            .iter()
            .position(|m| m == model)
            .map(|i| self.scores[i].as_slice())
    }

    pub fn n_fake(&self) -> usize {
        self.labels.iter().filter(|l| l.is_fake()).count()
    }

    /// Returns a copy restricted to the given model rows, in the given order.
    pub fn select_models(&self, models: &[ModelId]) -> Result<ScorePanel> {
        let mut rows = Vec::with_capacity(models.len());
        for m in models {
            let row = self.row_by_id(m).ok_or_else(|| Error::ModelMismatch {
                expected: models.iter().map(ToString::to_string).collect(),
                found: self.models.iter().map(ToString::to_string).collect(),
            })?;
            rows.push(row.to_vec());
        }
        ScorePanel::new(
            self.dataset.clone(),
            models.to_vec(),
            self.sample_ids.clone(),
            self.labels.clone(),
            rows,
        )
    }

    /// Appends rows; the result is re-validated.
    pub(crate) fn with_extra_rows(&self, extra: Vec<(ModelId, Vec<f64>)>) -> Result<ScorePanel> {
        let mut models = self.models.clone();
        let mut rows = self.scores.clone();
        for (id, row) in extra {
            models.push(id);
            rows.push(row);
        }
        ScorePanel::new(
            self.dataset.clone(),
            models,
            self.sample_ids.clone(),
            self.labels.clone(),
            rows,
        )
    }
}

impl From<ScorePanel> for RawPanel {
    fn from(p: ScorePanel) -> Self {
        RawPanel {
            dataset: p.dataset,
            models: p.models,
            sample_ids: p.sample_ids,
            labels: p.labels,
            scores: p
                .scores
                .into_iter()
                .map(|row| row.into_iter().map(Some).collect())
                .collect(),
        }
    }
}

/// Checks every panel invariant and returns the validated panel.
pub fn validate_panel(raw: RawPanel) -> Result<ScorePanel> {
    if raw.models.is_empty() {
        return Err(Error::NoModels);
    }
    let mut seen = HashSet::new();
    for m in &raw.models {
        if !seen.insert(m) {
            return Err(Error::DuplicateModelId(m.to_string()));
        }
    }
    let mut seen = HashSet::new();
    for s in &raw.sample_ids {
        if !seen.insert(s.as_str()) {
            return Err(Error::DuplicateSampleId(s.clone()));
        }
    }
    if raw.labels.len() != raw.sample_ids.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} samples",
            raw.labels.len(),
            raw.sample_ids.len()
        )));
    }
    if raw.scores.len() != raw.models.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} score rows for {} models",
            raw.scores.len(),
            raw.models.len()
        )));
    }

    let mut scores = Vec::with_capacity(raw.models.len());
    for (model, row) in raw.models.iter().zip(raw.scores) {
        if row.len() > raw.sample_ids.len() {
            return Err(Error::ShapeMismatch(format!(
                "model `{model}` has {} scores for {} samples",
                row.len(),
                raw.sample_ids.len()
            )));
        }
        let mut dense = Vec::with_capacity(raw.sample_ids.len());
        for (i, sample) in raw.sample_ids.iter().enumerate() {
            match row.get(i).copied().flatten() {
                None => {
                    return Err(Error::MissingCell {
                        model: model.to_string(),
                        sample: sample.clone(),
                    })
                }
                Some(v) if !is_probability(v) => {
                    return Err(Error::ScoreOutOfRange {
                        model: model.to_string(),
                        sample: sample.clone(),
                        value: v,
                    })
                }
                Some(v) => dense.push(v),
            }
        }
        scores.push(dense);
    }

    let n_fake = raw.labels.iter().filter(|l| l.is_fake()).count();
    if n_fake == 0 || n_fake == raw.labels.len() {
        return Err(Error::SingleClassDataset(raw.dataset.to_string()));
    }

    Ok(ScorePanel {
        dataset: raw.dataset,
        models: raw.models,
        sample_ids: raw.sample_ids,
        labels: raw.labels,
        scores,
    })
}
