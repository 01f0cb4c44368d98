//! Manifest-driven runs: load panels, derive weights, attach ensembles,
//! evaluate, and assemble the report bundle.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fusion::{attach_ensembles, derive_weights_for, FusionStrategy};
use crate::ingest::{input_label, read_input, InputFile, JoinPolicy, LoadedManifest, StrategyChoice, WeightSource};
use crate::metrics::evaluate_panels;
use crate::model::{normalize_weights, MetricsTable, ModelId, ScorePanel, WeightVector};
use crate::report::{Provenance, ReportBundle};

pub const ENSEMBLE_AVG: &str = "ensemble-avg";
pub const ENSEMBLE_WEIGHTED: &str = "ensemble-weighted";

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub join_policy: JoinPolicy,
    pub strategy: StrategyChoice,
    pub weights: WeightSource,
    pub accuracy_threshold: f64,
}

impl RunOptions {
    /// Options as written in the manifest, with strict joining. A relative
    /// weight-file path is resolved against the manifest directory.
    pub fn from_manifest(loaded: &LoadedManifest) -> Self {
        let f = &loaded.manifest.fusion;
        RunOptions {
            join_policy: JoinPolicy::Strict,
            strategy: f.strategy,
            weights: f.weights.clone(),
            accuracy_threshold: f.accuracy_threshold,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetRun {
    /// Member rows followed by the ensemble rows.
    pub panel: ScorePanel,
    pub members: Vec<ModelId>,
    pub weights: Option<WeightVector>,
    pub dropped: usize,
}

#[derive(Debug, Clone)]
pub struct Run {
    pub datasets: Vec<DatasetRun>,
    pub metrics: MetricsTable,
    pub provenance: Provenance,
}

impl Run {
    pub fn bundle(&self) -> Result<ReportBundle> {
        ReportBundle::build(self.metrics.clone(), self.provenance.clone())
    }
}

/// Reads `{ "model": weight, … }` and normalizes it in `models` order.
pub fn read_weight_file(path: &Path, label: String, models: &[ModelId]) -> Result<(WeightVector, InputFile)> {
    let (text, input) = read_input(path, label)?;
    let raw: BTreeMap<ModelId, f64> = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if let Some(extra) = raw.keys().find(|k| !models.contains(k)) {
        return Err(Error::Manifest(format!("weight file names unknown model `{extra}`")));
    }
    let ordered = models
        .iter()
        .map(|m| {
            raw.get(m)
                .copied()
                .ok_or_else(|| Error::Manifest(format!("weight file has no weight for `{m}`")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((normalize_weights(&ordered)?, input))
}

pub fn ensemble_strategies(
    choice: StrategyChoice,
    weights: Option<&WeightVector>,
) -> Result<Vec<(ModelId, FusionStrategy)>> {
    let avg = || (ModelId::new(ENSEMBLE_AVG).expect("literal"), FusionStrategy::Uniform);
    let weighted = || -> Result<(ModelId, FusionStrategy)> {
        let w = weights.ok_or_else(|| Error::Invariant("weighted fusion requested without weights".into()))?;
        Ok((
            ModelId::new(ENSEMBLE_WEIGHTED).expect("literal"),
            FusionStrategy::Weighted(w.clone()),
        ))
    };
    Ok(match choice {
        StrategyChoice::Uniform => vec![avg()],
        StrategyChoice::Weighted => vec![weighted()?],
        StrategyChoice::Both => vec![avg(), weighted()?],
    })
}

/// Fuses one member panel. `validation` is needed only for derived weights.
pub fn fuse_dataset(
    panel: &ScorePanel,
    validation: Option<&ScorePanel>,
    options: &RunOptions,
    file_weights: Option<&WeightVector>,
) -> Result<(ScorePanel, Option<WeightVector>)> {
    let weights = match options.strategy {
        StrategyChoice::Uniform => None,
        _ => Some(match (&options.weights, file_weights) {
            (WeightSource::File(_), Some(w)) => w.clone(),
            (WeightSource::File(p), None) => {
                return Err(Error::Invariant(format!("weight file {} was not loaded", p.display())))
            }
            (source, _) => {
                let v = validation.ok_or_else(|| {
                    Error::Manifest(format!(
                        "dataset `{}` has no validation files; weighted fusion needs them or a weight file",
                        panel.dataset()
                    ))
                })?;
                derive_weights_for(panel.models(), v, source.skill(options.accuracy_threshold))?
            }
        }),
    };
    let strategies = ensemble_strategies(options.strategy, weights.as_ref())?;
    Ok((attach_ensembles(panel, &strategies)?, weights))
}

/// Runs every dataset of a manifest through fusion and evaluation.
pub fn run_manifest(loaded: &LoadedManifest, options: &RunOptions) -> Result<Run> {
    let models = &loaded.manifest.models;
    let mut inputs = Vec::new();
    let file_weights = match (&options.weights, options.strategy) {
        (WeightSource::File(p), StrategyChoice::Weighted | StrategyChoice::Both) => {
            let (w, input) = read_weight_file(&loaded.resolve(p), input_label(p), models)?;
            inputs.push(input);
            Some(w)
        }
        _ => None,
    };
    let mut datasets = Vec::new();
    for entry in &loaded.manifest.datasets {
        let ds = loaded.load_dataset(entry, options.join_policy)?;
        inputs.extend(ds.inputs.iter().cloned());
        let (panel, weights) = fuse_dataset(&ds.panel, ds.validation.as_ref(), options, file_weights.as_ref())?;
        datasets.push(DatasetRun {
            panel,
            members: models.clone(),
            weights,
            dropped: ds.dropped,
        });
    }
    let metrics = evaluate_panels(datasets.iter().map(|d| &d.panel))?;
    Ok(Run {
        datasets,
        metrics,
        provenance: Provenance::new(Some(loaded.digest.clone()), inputs),
    })
}
