//! Beta-posterior inlier probabilities and the adaptive temperature.
//!
//! For an anomaly-high score `s` and a reference batch of `n` scores, let
//! `t = #{s' <= s}`. Under a uniform Beta(1, 1) prior the posterior mean of
//! `P(S <= s)` is `(1 + t) / (2 + n)`, and the inlier probability is one minus
//! that. The adaptive temperature is the ratio of the summed binary entropies
//! of the evidence and base probabilities.

use serde::{Deserialize, Serialize};

use crate::data::{Normalization, Orientation, ScoreVector};
use crate::error::{Error, Result};
use crate::fusion::{fuse_scores, FusionConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct InlierProbabilities {
    p_inlier: Vec<f64>,
    n_reference: usize,
}

impl InlierProbabilities {
    pub fn p_inlier(&self) -> &[f64] {
        &self.p_inlier
    }

    pub fn p_outlier(&self) -> Vec<f64> {
        self.p_inlier.iter().map(|p| 1.0 - p).collect()
    }

    pub fn n_reference(&self) -> usize {
        self.n_reference
    }

    pub fn len(&self) -> usize {
        self.p_inlier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_inlier.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaConfig {
    pub delta: f64,
}

impl Default for AdaConfig {
    fn default() -> Self {
        Self { delta: 1e-12 }
    }
}

impl AdaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Inlier probability of every entry of `scores` against `reference`.
///
/// Both vectors are brought to anomaly-high orientation first, so a larger
/// anomaly score never yields a larger inlier probability.
pub fn inlier_probability(
    scores: &ScoreVector,
    reference: &ScoreVector,
) -> Result<InlierProbabilities> {
    if reference.is_empty() {
        return Err(Error::Data(
            "inlier probability needs a non-empty reference".into(),
        ));
    }
    let mut sorted = reference.reorient(Orientation::AnomalyHigh).into_values();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let denom = (2 + n) as f64;
    let p_inlier = scores
        .reorient(Orientation::AnomalyHigh)
        .values()
        .iter()
        .map(|&s| {
            let t = sorted.partition_point(|&r| r <= s);
            (1 + n - t) as f64 / denom
        })
        .collect();
    Ok(InlierProbabilities {
        p_inlier,
        n_reference: n,
    })
}

fn binary_entropy(p: f64) -> f64 {
    let q = 1.0 - p;
    let term = |v: f64| if v > 0.0 { v * v.ln() } else { 0.0 };
    -(term(p) + term(q))
}

/// Sum over samples of the binary entropy (nats).
pub fn binary_entropy_sum(probs: &InlierProbabilities) -> f64 {
    probs.p_inlier.iter().map(|&p| binary_entropy(p)).sum()
}

/// `h_evidence / (h_base + delta)`.
pub fn beta_from_entropies(h_evidence: f64, h_base: f64, delta: f64) -> f64 {
    h_evidence / (h_base + delta)
}

/// Adaptive temperature from the two score vectors, each calibrated against
/// itself.
pub fn beta_ada(base: &ScoreVector, evidence: &ScoreVector, config: &AdaConfig) -> Result<f64> {
    config.validate()?;
    if base.len() != evidence.len() {
        return Err(Error::LengthMismatch {
            left: base.len(),
            right: evidence.len(),
        });
    }
    if base.is_empty() {
        return Err(Error::Data(
            "adaptive temperature needs non-empty scores".into(),
        ));
    }
    let h_base = binary_entropy_sum(&inlier_probability(base, base)?);
    let h_evidence = binary_entropy_sum(&inlier_probability(evidence, evidence)?);
    Ok(beta_from_entropies(h_evidence, h_base, config.delta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaFusion {
    pub scores: ScoreVector,
    pub beta_used: f64,
}

/// Fusion with the temperature chosen by [`beta_ada`].
pub fn fuse_ada(
    base: &ScoreVector,
    evidence: &ScoreVector,
    normalization: Normalization,
    ada: &AdaConfig,
) -> Result<AdaFusion> {
    let beta = beta_ada(base, evidence, ada)?;
    let scores = fuse_scores(base, evidence, &FusionConfig::new(beta, normalization)?)?;
    Ok(AdaFusion {
        scores,
        beta_used: beta,
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn monotone_and_rank_invariant(raw in prop::collection::vec(-100.0f64..100.0, 1..80)) {
            let s = ScoreVector::new(raw.clone(), Orientation::AnomalyHigh, "p").unwrap();
            let p = inlier_probability(&s, &s).unwrap();
            for i in 0..raw.len() {
                for j in 0..raw.len() {
                    if raw[i] > raw[j] {
                        prop_assert!(p.p_inlier()[i] <= p.p_inlier()[j]);
                    }
                }
            }
            let warped: Vec<f64> = raw.iter().map(|v| v.powi(3) + v).collect();
            let w = ScoreVector::new(warped, Orientation::AnomalyHigh, "p").unwrap();
            prop_assert_eq!(inlier_probability(&w, &w).unwrap(), p);
        }
    }
}
