use serde::Serialize;

use crate::error::{Error, Result};

/// Maximum allowed deviation of a weight vector's sum from 1.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Non-negative per-model weights summing to one, in model order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// `1/n` for each of `n` models.
    pub fn uniform(n: usize) -> Result<Self> {
        normalize_weights(&vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Scales raw non-negative weights to sum to one.
pub fn normalize_weights(raw: &[f64]) -> Result<WeightVector> {
    if raw.len() < 2 {
        return Err(Error::TooFewWeights {
            min: 2,
            found: raw.len(),
        });
    }
    if let Some((index, &value)) = raw.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
        return Err(Error::NegativeWeight { index, value });
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    if !total.is_finite() {
        return Err(Error::NegativeWeight { index: 0, value: total });
    }
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::Invariant(format!("normalized weights sum to {sum}")));
    }
    Ok(WeightVector(weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_six() {
        let w = normalize_weights(&[1.0; 6]).unwrap();
        assert_eq!(w.as_slice(), &[1.0 / 6.0; 6]);
        assert_eq!(WeightVector::uniform(6).unwrap(), w);
    }

    #[test]
    fn exact_ratio() {
        let w = normalize_weights(&[2.0, 1.0, 1.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn all_zero_rejected() {
        assert!(matches!(
            normalize_weights(&[0.0, 0.0, 0.0]),
            Err(Error::AllZeroWeights)
        ));
    }

    #[test]
    fn negative_rejected() {
        assert!(matches!(
            normalize_weights(&[1.0, -0.5]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert!(matches!(
            normalize_weights(&[1.0, f64::NAN]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
    }

    #[test]
    fn single_weight_rejected() {
        assert!(matches!(normalize_weights(&[1.0]), Err(Error::TooFewWeights { .. })));
    }

    proptest! {
        #[test]
        fn sums_to_one_and_is_scale_free(
            raw in prop::collection::vec(0.0f64..100.0, 2..50),
            k in 1e-3f64..1e3,
        ) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-9);
            let w = normalize_weights(&raw).unwrap();
            prop_assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(w.as_slice().iter().all(|&x| x >= 0.0));
            let scaled: Vec<f64> = raw.iter().map(|x| x * k).collect();
            let ws = normalize_weights(&scaled).unwrap();
            for (a, b) in w.as_slice().iter().zip(ws.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
