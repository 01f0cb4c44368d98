use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{join_panels, parse_score_file, parse_score_json, JoinPolicy, ScoreFileRow};
use crate::error::{Error, Result};
use crate::fusion::{SkillSource, DEFAULT_ACCURACY_THRESHOLD};
use crate::model::{DatasetId, ModelId, ScorePanel};

/// JSON run description. Score-file paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub models: Vec<ModelId>,
    pub datasets: Vec<DatasetEntry>,
    #[serde(default)]
    pub fusion: FusionSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub id: DatasetId,
    pub scores: BTreeMap<ModelId, PathBuf>,
    /// Held-out score files used to derive skill weights for this dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<BTreeMap<ModelId, PathBuf>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyChoice {
    Uniform,
    Weighted,
    #[default]
    Both,
}

impl std::str::FromStr for StrategyChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(StrategyChoice::Uniform),
            "weighted" => Ok(StrategyChoice::Weighted),
            "both" => Ok(StrategyChoice::Both),
            other => Err(Error::Manifest(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Where ensemble weights come from: `auroc`, `chance-adjusted`, `accuracy`
/// or `file:<path>` (a JSON object mapping model id to raw weight).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightSource {
    #[default]
    Auroc,
    ChanceAdjusted,
    Accuracy,
    File(PathBuf),
}

impl WeightSource {
    pub fn skill(&self, threshold: f64) -> SkillSource {
        match self {
            WeightSource::Auroc => SkillSource::AurocProportional,
            WeightSource::ChanceAdjusted => SkillSource::ChanceAdjustedAuroc,
            WeightSource::Accuracy => SkillSource::AccuracyProportional { threshold },
            WeightSource::File(_) => SkillSource::UserSupplied,
        }
    }
}

impl std::str::FromStr for WeightSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auroc" => Ok(WeightSource::Auroc),
            "chance-adjusted" => Ok(WeightSource::ChanceAdjusted),
            "accuracy" => Ok(WeightSource::Accuracy),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(WeightSource::File(PathBuf::from(p))),
                _ => Err(Error::Manifest(format!("unknown weight source `{s}`"))),
            },
        }
    }
}

impl TryFrom<String> for WeightSource {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WeightSource> for String {
    fn from(w: WeightSource) -> String {
        match w {
            WeightSource::Auroc => "auroc".into(),
            WeightSource::ChanceAdjusted => "chance-adjusted".into(),
            WeightSource::Accuracy => "accuracy".into(),
            WeightSource::File(p) => format!("file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSettings {
    #[serde(default)]
    pub strategy: StrategyChoice,
    #[serde(default)]
    pub weights: WeightSource,
    #[serde(default = "default_threshold")]
    pub accuracy_threshold: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_ACCURACY_THRESHOLD
}

impl Default for FusionSettings {
    fn default() -> Self {
        FusionSettings {
            strategy: StrategyChoice::default(),
            weights: WeightSource::default(),
            accuracy_threshold: DEFAULT_ACCURACY_THRESHOLD,
        }
    }
}

impl RunManifest {
    pub fn validate(&self) -> Result<()> {
        if self.models.len() < 2 {
            return Err(Error::Manifest(format!(
                "need at least 2 models, got {}",
                self.models.len()
            )));
        }
        let mut seen = HashSet::new();
        for m in &self.models {
            if !seen.insert(m) {
                return Err(Error::DuplicateModelId(m.to_string()));
            }
        }
        if self.datasets.is_empty() {
            return Err(Error::Manifest("no datasets listed".into()));
        }
        let mut seen = HashSet::new();
        for d in &self.datasets {
            if !seen.insert(&d.id) {
                return Err(Error::Manifest(format!("dataset `{}` listed twice", d.id)));
            }
            check_covers(&self.models, &d.scores, &d.id, "scores")?;
            if let Some(v) = &d.validation {
                check_covers(&self.models, v, &d.id, "validation")?;
            }
        }
        let t = self.fusion.accuracy_threshold;
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidThreshold(t));
        }
        Ok(())
    }
}

fn check_covers(models: &[ModelId], files: &BTreeMap<ModelId, PathBuf>, dataset: &DatasetId, what: &str) -> Result<()> {
    if let Some(m) = models.iter().find(|m| !files.contains_key(*m)) {
        return Err(Error::Manifest(format!(
            "dataset `{dataset}` {what}: no file for model `{m}`"
        )));
    }
    if let Some(m) = files.keys().find(|m| !models.contains(m)) {
        return Err(Error::Manifest(format!(
            "dataset `{dataset}` {what}: unknown model `{m}`"
        )));
    }
    Ok(())
}

/// A file read as pipeline input, identified by its path as written in the
/// manifest and the SHA-256 of its bytes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

pub fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads a UTF-8 file and records its digest under `label`.
pub fn read_input(path: &Path, label: impl Into<String>) -> Result<(String, InputFile)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = digest_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| Error::MalformedRow {
        line: 0,
        message: format!("{}: not UTF-8 ({e})", path.display()),
    })?;
    Ok((
        text,
        InputFile {
            path: label.into(),
            sha256: digest,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub manifest: RunManifest,
    pub base_dir: PathBuf,
    pub digest: String,
}

pub fn load_manifest(path: &Path) -> Result<LoadedManifest> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let manifest: RunManifest = serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    manifest.validate()?;
    Ok(LoadedManifest {
        manifest,
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        digest: digest_hex(&bytes),
    })
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub panel: ScorePanel,
    pub dropped: usize,
    pub validation: Option<ScorePanel>,
    pub inputs: Vec<InputFile>,
}

/// Provenance label for an input path: relative paths are kept as written,
/// absolute ones are reduced to their file name so reports do not depend on
/// where the inputs live.
pub fn input_label(path: &Path) -> String {
    if path.is_absolute() {
        if let Some(name) = path.file_name() {
            return name.to_string_lossy().into_owned();
        }
    }
    path.to_string_lossy().replace('\\', "/")
}

impl LoadedManifest {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    fn read_rows(&self, path: &Path, inputs: &mut Vec<InputFile>) -> Result<Vec<ScoreFileRow>> {
        let full = self.resolve(path);
        let (text, input) = read_input(&full, input_label(path))?;
        inputs.push(input);
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        let parsed = if is_json {
            parse_score_json(&text)
        } else {
            parse_score_file(&text)
        };
        parsed.map_err(|e| Error::InFile {
            path: full,
            source: Box::new(e),
        })
    }

    fn join(
        &self,
        dataset: &DatasetId,
        files: &BTreeMap<ModelId, PathBuf>,
        policy: JoinPolicy,
        inputs: &mut Vec<InputFile>,
    ) -> Result<(ScorePanel, usize)> {
        let mut per_model = Vec::with_capacity(self.manifest.models.len());
        for m in &self.manifest.models {
            per_model.push((m.clone(), self.read_rows(&files[m], inputs)?));
        }
        let out = join_panels(&per_model, dataset.clone(), policy)?;
        Ok((out.panel, out.dropped))
    }

    /// Reads and joins one dataset's score files (and validation files, if
    /// listed). Rows follow the manifest's model order.
    pub fn load_dataset(&self, entry: &DatasetEntry, policy: JoinPolicy) -> Result<LoadedDataset> {
        let mut inputs = Vec::new();
        let (panel, dropped) = self.join(&entry.id, &entry.scores, policy, &mut inputs)?;
        let validation = match &entry.validation {
            Some(files) => Some(self.join(&entry.id, files, policy, &mut inputs)?.0),
            None => None,
        };
        Ok(LoadedDataset {
            panel,
            dropped,
            validation,
            inputs,
        })
    }

    pub fn load_all(&self, policy: JoinPolicy) -> Result<Vec<LoadedDataset>> {
        self.manifest
            .datasets
            .iter()
            .map(|d| self.load_dataset(d, policy))
            .collect()
    }
}
