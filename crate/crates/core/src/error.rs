use std::path::PathBuf;

use thiserror::Error;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed files, violated data invariants, bad arguments.
    Validation,
    /// Filesystem failures.
    Io,
    /// The library broke one of its own postconditions.
    Invariant,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("identifier must be non-empty and not whitespace-only")]
    EmptyId,
    #[error("duplicate model id `{0}`")]
    DuplicateModelId(String),
    #[error("duplicate sample id `{0}`")]
    DuplicateSampleId(String),
    #[error("panel has no models")]
    NoModels,
    #[error("missing score for model `{model}`, sample `{sample}`")]
    MissingCell { model: String, sample: String },
    #[error("panel shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("score {value} for model `{model}`, sample `{sample}` is outside [0, 1]")]
    ScoreOutOfRange { model: String, sample: String, value: f64 },
    #[error("dataset `{0}` contains a single class; both labels are required")]
    SingleClassDataset(String),
    #[error("need at least {min} weights, got {found}")]
    TooFewWeights { min: usize, found: usize },
    #[error("weight {index} is negative or not finite ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite score at position {0}")]
    NonFiniteScore(usize),
    #[error("threshold {0} must lie strictly between 0 and 1")]
    InvalidThreshold(f64),

    #[error("bad header: expected `{expected}`, found `{found}`")]
    BadHeader { expected: &'static str, found: String },
    #[error("line {line}: bad label `{value}` (expected 0 or 1)")]
    BadLabel { line: u64, value: String },
    #[error("line {line}: bad score `{value}` (expected a finite number in [0, 1])")]
    BadScore { line: u64, value: String },
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },
    #[error("sample sets differ between `{first}` and `{other}`")]
    SampleSetMismatch { first: String, other: String },
    #[error("sample `{0}` carries different labels in different score files")]
    LabelConflict(String),
    #[error("score files share no sample ids")]
    EmptyIntersection,
    #[error("duplicate metrics entry for model `{model}`, dataset `{dataset}`")]
    DuplicateEntry { model: String, dataset: String },
    #[error("{location}: metric value {value} outside [0, 1]")]
    ValueOutOfRange { location: String, value: f64 },
    #[error("no metrics entry for model `{model}`, dataset `{dataset}`")]
    MissingEntry { model: String, dataset: String },
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("need at least {min} datasets, got {found}")]
    TooFewDatasets { min: usize, found: usize },

    #[error("need at least 2 models to fuse, got {0}")]
    TooFewModels(usize),
    #[error("skill measures are all zero; cannot derive weights")]
    DegenerateSkills,
    #[error("user-supplied weights cannot be derived from a validation panel")]
    UserSuppliedSkill,
    #[error("model id `{0}` collides with an existing row")]
    NameCollision(String),
    #[error("validation panel models {found:?} do not match {expected:?}")]
    ModelMismatch { expected: Vec<String>, found: Vec<String> },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Box<Error> },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Invariant(_) => ErrorKind::Invariant,
            Error::InFile { source, .. } => source.kind(),
            _ => ErrorKind::Validation,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
