//! Synthetic score panels with controlled per-model skill and inter-model
//! correlation.
//!
//! Each detector follows a binormal model: real samples draw a latent from
//! N(0, 1) and fake samples from N(μ, 1), where `μ = √2 · Φ⁻¹(target AUROC)`.
//! Latents of different detectors share one common Gaussian factor with
//! loading `√ρ`, giving an equicorrelated one-factor Gaussian copula. Scores
//! are the logistic transform of the latent.
//!
//! Randomness comes from ChaCha20 keyed by the seed: stream 0 carries the
//! common factor, stream `i + 1` carries detector `i`. Uniforms are turned into
//! normals by inversion, and all transcendental functions come from `libm`,
//! so a given spec yields the same bytes on every platform.

mod normal;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DatasetId, Label, ModelId, ScorePanel};

pub use normal::{normal_cdf, normal_quantile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_pos: usize,
    pub n_neg: usize,
    /// One entry per detector.
    pub target_auroc: Vec<f64>,
    /// Latent correlation between any two detectors, in `[0, 1)`.
    pub rho: f64,
    pub seed: u64,
    #[serde(default = "default_dataset")]
    pub dataset: DatasetId,
}

fn default_dataset() -> DatasetId {
    DatasetId::new("synthetic").expect("non-empty literal")
}

impl SynthSpec {
    pub fn new(n_pos: usize, n_neg: usize, target_auroc: Vec<f64>, rho: f64, seed: u64) -> Self {
        SynthSpec {
            n_pos,
            n_neg,
            target_auroc,
            rho,
            seed,
            dataset: default_dataset(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pos == 0 || self.n_neg == 0 {
            return Err(Error::InvalidSpec("n_pos and n_neg must both be at least 1".into()));
        }
        if self.target_auroc.is_empty() {
            return Err(Error::InvalidSpec("at least one target AUROC is required".into()));
        }
        if let Some(t) = self.target_auroc.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::InvalidSpec(format!("target AUROC {t} outside (0, 1)")));
        }
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidSpec(format!("rho {} outside [0, 1)", self.rho)));
        }
        Ok(())
    }

    pub fn model_ids(&self) -> Vec<ModelId> {
        let width = self.target_auroc.len().to_string().len().max(2);
        (1..=self.target_auroc.len())
            .map(|i| ModelId::new(format!("model-{i:0width$}")).expect("non-empty"))
            .collect()
    }

    /// Sample ids; fakes come first.
    pub fn sample_ids(&self) -> Vec<String> {
        let n = self.n_pos + self.n_neg;
        let width = n.to_string().len();
        (0..n).map(|i| format!("s{i:0width$}")).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        std::iter::repeat_n(Label::Fake, self.n_pos)
            .chain(std::iter::repeat_n(Label::Real, self.n_neg))
            .collect()
    }
}

/// Class-mean separation that yields `target` AUROC under the binormal model.
pub fn mu_for_auroc(target: f64) -> f64 {
    std::f64::consts::SQRT_2 * normal_quantile(target)
}

/// Binormal AUROC `Φ(μ/√2)` for class-mean separation `mu`.
pub fn expected_auroc_of_mu(mu: f64) -> f64 {
    normal_cdf(mu / std::f64::consts::SQRT_2)
}

struct NormalStream(ChaCha20Rng);

impl NormalStream {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        NormalStream(rng)
    }

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    fn uniform(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    fn next(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }
}

/// Latent (pre-logistic) values, one row per detector.
pub fn generate_latents(spec: &SynthSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let n = spec.n_pos + spec.n_neg;
    let mut common = NormalStream::new(spec.seed, 0);
    let factor: Vec<f64> = (0..n).map(|_| common.next()).collect();
    let shared = libm::sqrt(spec.rho);
    let own = libm::sqrt(1.0 - spec.rho);
    let rows = spec
        .target_auroc
        .iter()
        .enumerate()
        .map(|(i, &target)| {
            let mu = mu_for_auroc(target);
            let mut noise = NormalStream::new(spec.seed, i as u64 + 1);
            factor
                .iter()
                .enumerate()
                .map(|(s, f)| {
                    let shift = if s < spec.n_pos { mu } else { 0.0 };
                    shift + shared * f + own * noise.next()
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Synthetic panel for `spec`; identical specs give bit-identical panels.
pub fn generate_panel(spec: &SynthSpec) -> Result<ScorePanel> {
    let rows = generate_latents(spec)?
        .into_iter()
        .map(|row| row.into_iter().map(logistic).collect())
        .collect();
    ScorePanel::new(
        spec.dataset.clone(),
        spec.model_ids(),
        spec.sample_ids(),
        spec.labels(),
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::auroc;

    #[test]
    fn expected_auroc_examples() {
        assert_eq!(expected_auroc_of_mu(0.0), 0.5);
        assert!((expected_auroc_of_mu(1.8124) - 0.90).abs() < 1e-3);
        assert!(expected_auroc_of_mu(40.0) == 1.0);
        assert!(expected_auroc_of_mu(8.0) > 1.0 - 1e-8);
        for t in [0.55, 0.75, 0.9, 0.99] {
            assert!((expected_auroc_of_mu(mu_for_auroc(t)) - t).abs() < 1e-14);
        }
        assert!((mu_for_auroc(0.9) - 1.8124).abs() < 1e-4);
    }

    #[test]
    fn invalid_specs() {
        let mut s = SynthSpec::new(10, 10, vec![0.7], 0.0, 1);
        s.rho = 1.0;
        assert!(matches!(generate_panel(&s), Err(Error::InvalidSpec(_))));
        s.rho = 0.999_999;
        assert!(s.validate().is_ok());
        s.rho = -0.1;
        assert!(s.validate().is_err());
        s.rho = f64::NAN;
        assert!(s.validate().is_err());
        let s = SynthSpec::new(0, 10, vec![0.7], 0.0, 1);
        assert!(s.validate().is_err());
        let s = SynthSpec::new(10, 10, vec![1.0], 0.0, 1);
        assert!(s.validate().is_err());
        let s = SynthSpec::new(10, 10, vec![], 0.0, 1);
        assert!(s.validate().is_err());
    }

    #[test]
    fn deterministic_and_streams_distinct() {
        let spec = SynthSpec::new(200, 200, vec![0.8, 0.8, 0.8], 0.0, 42);
        let a = generate_panel(&spec).unwrap();
        let b = generate_panel(&spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.row(0), a.row(1));
        assert_ne!(a.row(1), a.row(2));
    }

    #[test]
    fn adding_a_model_keeps_existing_rows() {
        let small = generate_panel(&SynthSpec::new(50, 50, vec![0.7, 0.8], 0.3, 9)).unwrap();
        let big = generate_panel(&SynthSpec::new(50, 50, vec![0.7, 0.8, 0.9], 0.3, 9)).unwrap();
        assert_eq!(small.row(0), big.row(0));
        assert_eq!(small.row(1), big.row(1));
    }

    #[test]
    fn empirical_auroc_tracks_target() {
        let spec = SynthSpec::new(10_000, 10_000, vec![0.5, 0.9], 0.3, 7);
        let p = generate_panel(&spec).unwrap();
        let chance = auroc(p.labels(), p.row(0)).unwrap();
        let good = auroc(p.labels(), p.row(1)).unwrap();
        assert!((0.45..=0.55).contains(&chance), "{chance}");
        assert!((0.88..=0.92).contains(&good), "{good}");
    }

    #[test]
    fn skill_is_monotone_in_target() {
        let spec = SynthSpec::new(10_000, 10_000, vec![0.6, 0.7, 0.8, 0.9], 0.0, 3);
        let p = generate_panel(&spec).unwrap();
        let a: Vec<f64> = (0..4).map(|m| auroc(p.labels(), p.row(m)).unwrap()).collect();
        assert!(a.windows(2).all(|w| w[0] < w[1]), "{a:?}");
    }

    #[test]
    fn logistic_preserves_auroc() {
        let spec = SynthSpec::new(500, 700, vec![0.65, 0.85], 0.5, 11);
        let latents = generate_latents(&spec).unwrap();
        let panel = generate_panel(&spec).unwrap();
        for (m, latent) in latents.iter().enumerate() {
            assert_eq!(
                auroc(panel.labels(), latent).unwrap(),
                auroc(panel.labels(), panel.row(m)).unwrap()
            );
        }
    }

    #[test]
    fn latent_correlation_matches_rho() {
        let spec = SynthSpec::new(1, 20_000, vec![0.5, 0.5], 0.6, 5);
        let l = generate_latents(&spec).unwrap();
        let n = l[0].len() as f64;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
        let (ma, mb) = (mean(&l[0]), mean(&l[1]));
        let cov = l[0].iter().zip(&l[1]).map(|(a, b)| (a - ma) * (b - mb)).sum::<f64>() / n;
        let var = |v: &[f64], m: f64| v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let corr = cov / (var(&l[0], ma) * var(&l[1], mb)).sqrt();
        assert!((corr - 0.6).abs() < 0.03, "{corr}");
    }
}
