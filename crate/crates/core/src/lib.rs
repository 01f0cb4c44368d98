//! Late-fusion ensembling and cross-dataset evaluation for binary detectors.
//!
//! The crate takes per-sample fake probabilities from several detectors,
//! fuses them by uniform or skill-weighted averaging, scores every detector
//! and ensemble with AUROC and average precision, and analyzes how model
//! rankings move between datasets.
//!
//! ```
//! use fuselab_core::prelude::*;
//!
//! let panel = ScorePanel::new(
//!     DatasetId::new("demo").unwrap(),
//!     vec![ModelId::new("a").unwrap(), ModelId::new("b").unwrap()],
//!     vec!["s1".into(), "s2".into(), "s3".into()],
//!     labels_from_bits(&[1, 0, 1]),
//!     vec![vec![0.9, 0.2, 0.4], vec![0.7, 0.6, 0.8]],
//! )
//! .unwrap();
//! let fused = fuse_uniform(&panel).unwrap();
//! assert_eq!(fused[0], 0.8);
//! let result = evaluate(panel.labels(), &fused).unwrap();
//! assert_eq!(result.auroc, 1.0);
//! ```

pub mod analysis;
pub mod error;
pub mod fusion;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use error::{Error, ErrorKind, Result};

pub mod prelude {
    pub use crate::analysis::{rank_models, rank_shifts, robustness_summary, RankShift, RobustnessSummary};
    pub use crate::error::{Error, ErrorKind, Result};
    pub use crate::fusion::{
        attach_ensembles, derive_weights, fuse_uniform, fuse_weighted, FusionStrategy, SkillSource,
    };
    pub use crate::ingest::{join_panels, parse_metrics_table, parse_score_file, JoinPolicy};
    pub use crate::metrics::{
        accuracy, auprc, auroc, curve_points, evaluate, evaluate_panel, CurveKind, EvaluationResult,
    };
    pub use crate::model::{
        labels_from_bits, normalize_weights, validate_panel, DatasetId, Label, MetricKind, MetricPair, MetricsTable,
        ModelId, RankTable, RawPanel, ScorePanel, WeightVector,
    };
    pub use crate::report::{render_json, render_markdown, Provenance, ReportBundle};
    pub use crate::synth::{expected_auroc_of_mu, generate_panel, SynthSpec};
}
