//! Probability-level (late) fusion of detector scores.
//!
//! The fused score of a sample is `Σ w_i · p_i` accumulated left to right in
//! panel model order. Uniform fusion is the same computation with `w_i = 1/N`,
//! so the two agree bit for bit when weights are uniform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics;
use crate::model::{normalize_weights, ModelId, ScorePanel, WeightVector};

/// Floor applied to chance-adjusted skill so below-chance models keep a
/// strictly positive weight.
pub const CHANCE_ADJUSTED_FLOOR: f64 = 1e-6;

pub const DEFAULT_ACCURACY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum FusionStrategy {
    Uniform,
    Weighted(WeightVector),
}

/// How per-model skill is measured on a validation panel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SkillSource {
    #[default]
    AurocProportional,
    ChanceAdjustedAuroc,
    AccuracyProportional {
        threshold: f64,
    },
    UserSupplied,
}

/// Weighted average of every member row, clamped to the members' min/max.
pub fn fuse_weighted(panel: &ScorePanel, weights: &WeightVector) -> Result<Vec<f64>> {
    if weights.len() != panel.n_models() {
        return Err(Error::LengthMismatch {
            expected: panel.n_models(),
            found: weights.len(),
        });
    }
    let w = weights.as_slice();
    let fused = (0..panel.n_samples())
        .map(|s| {
            let mut acc = 0.0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (m, wm) in w.iter().enumerate() {
                let p = panel.row(m)[s];
                acc += wm * p;
                lo = lo.min(p);
                hi = hi.max(p);
            }
            // rounding can push the sum an ulp past the member range
            acc.clamp(lo, hi)
        })
        .collect();
    Ok(fused)
}

/// Unweighted mean of every member row.
pub fn fuse_uniform(panel: &ScorePanel) -> Result<Vec<f64>> {
    fuse_weighted(panel, &WeightVector::uniform(panel.n_models())?)
}

pub fn fuse(panel: &ScorePanel, strategy: &FusionStrategy) -> Result<Vec<f64>> {
    match strategy {
        FusionStrategy::Uniform => fuse_uniform(panel),
        FusionStrategy::Weighted(w) => fuse_weighted(panel, w),
    }
}

/// Raw (unnormalized) skill of every model on the validation panel.
pub fn raw_skills(validation: &ScorePanel, source: SkillSource) -> Result<Vec<f64>> {
    validation
        .rows()
        .map(|(_, row)| {
            let labels = validation.labels();
            match source {
                SkillSource::AurocProportional => metrics::auroc(labels, row),
                SkillSource::ChanceAdjustedAuroc => {
                    metrics::auroc(labels, row).map(|a| (a - 0.5).max(CHANCE_ADJUSTED_FLOOR))
                }
                SkillSource::AccuracyProportional { threshold } => metrics::accuracy(labels, row, threshold),
                SkillSource::UserSupplied => Err(Error::UserSuppliedSkill),
            }
            .map_err(|e| match e {
                Error::SingleClassDataset(_) => Error::SingleClassDataset(validation.dataset().to_string()),
                other => other,
            })
        })
        .collect()
}

/// Skill-proportional weights measured on a held-out panel.
pub fn derive_weights(validation: &ScorePanel, source: SkillSource) -> Result<WeightVector> {
    let skills = raw_skills(validation, source)?;
    if skills.iter().all(|s| *s <= 0.0) {
        return Err(Error::DegenerateSkills);
    }
    normalize_weights(&skills)
}

/// Like [`derive_weights`], but first checks that the validation panel carries
/// exactly `models` in that order.
pub fn derive_weights_for(models: &[ModelId], validation: &ScorePanel, source: SkillSource) -> Result<WeightVector> {
    if validation.models() != models {
        return Err(Error::ModelMismatch {
            expected: models.iter().map(ToString::to_string).collect(),
            found: validation.models().iter().map(ToString::to_string).collect(),
        });
    }
    derive_weights(validation, source)
}

/// Appends one fused row per strategy. Every strategy fuses the original
/// member rows only, never earlier ensembles.
pub fn attach_ensembles(panel: &ScorePanel, strategies: &[(ModelId, FusionStrategy)]) -> Result<ScorePanel> {
    if strategies.is_empty() {
        return Ok(panel.clone());
    }
    if panel.n_models() < 2 {
        return Err(Error::TooFewModels(panel.n_models()));
    }
    let mut extra: Vec<(ModelId, Vec<f64>)> = Vec::with_capacity(strategies.len());
    for (id, strategy) in strategies {
        if panel.models().contains(id) || extra.iter().any(|(e, _)| e == id) {
            return Err(Error::NameCollision(id.to_string()));
        }
        extra.push((id.clone(), fuse(panel, strategy)?));
    }
    panel.with_extra_rows(extra)
}
