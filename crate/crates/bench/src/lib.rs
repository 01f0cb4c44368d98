//! Shared inputs for the criterion benchmarks.

use fuselab_core::model::ScorePanel;
use fuselab_core::synth::{generate_panel, SynthSpec};

/// Six detectors of moderate skill over `n` fakes and `n` reals.
pub fn six_model_panel(n: usize, seed: u64) -> ScorePanel {
    generate_panel(&SynthSpec::new(n, n, vec![0.65, 0.7, 0.75, 0.8, 0.85, 0.9], 0.3, seed))
        .expect("valid synthetic spec")
}

/// Scores quantized to `levels` distinct values so tie blocks are large.
pub fn quantized(scores: &[f64], levels: u32) -> Vec<f64> {
    let l = f64::from(levels);
    scores.iter().map(|s| (s * l).round() / l).collect()
}
