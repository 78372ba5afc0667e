//! Additive score fusion and the thresholded detector built on it.
//!
//! With inlier-oriented base scores `s` and evidence `T`, the revised inlier
//! score is `s + T / beta`. Both inputs are first brought to inlier-high
//! orientation and normalized with the configured mode, which is fitted on the
//! batch being fused.

use serde::{Deserialize, Serialize};

use crate::data::{Label, Normalization, Orientation, ScoreScaler, ScoreVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub beta: f64,
    pub normalization: Normalization,
}

impl FusionConfig {
    pub fn new(beta: f64, normalization: Normalization) -> Result<Self> {
        let cfg = Self {
            beta,
            normalization,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive and finite, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            normalization: Normalization::Zscore,
        }
    }
}

/// Fitted normalizers for one (base, evidence) batch, so the same affine maps
/// can be reused on points outside the batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionScalers {
    pub base: ScoreScaler,
    pub evidence: ScoreScaler,
}

impl FusionScalers {
    /// Fit on inlier-oriented copies of both inputs.
    pub fn fit(base: &ScoreVector, evidence: &ScoreVector, mode: Normalization) -> Result<Self> {
        Ok(Self {
            base: ScoreScaler::fit(base.reorient(Orientation::InlierHigh).values(), mode)?,
            evidence: ScoreScaler::fit(evidence.reorient(Orientation::InlierHigh).values(), mode)?,
        })
    }

    /// Fused inlier score for a single inlier-oriented pair.
    pub fn fuse_one(&self, base_in: f64, evidence_in: f64, beta: f64) -> f64 {
        self.base.apply_one(base_in) + self.evidence.apply_one(evidence_in) / beta
    }
}

/// Revised inlier score `norm(s_in) + norm(T) / beta`.
pub fn fuse_scores(
    base: &ScoreVector,
    evidence: &ScoreVector,
    config: &FusionConfig,
) -> Result<ScoreVector> {
    config.validate()?;
    if base.len() != evidence.len() {
        return Err(Error::LengthMismatch {
            left: base.len(),
            right: evidence.len(),
        });
    }
    let scalers = FusionScalers::fit(base, evidence, config.normalization)?;
    let s_in = base.reorient(Orientation::InlierHigh);
    let t_in = evidence.reorient(Orientation::InlierHigh);
    let values = s_in
        .values()
        .iter()
        .zip(t_in.values())
        .map(|(&s, &t)| scalers.fuse_one(s, t, config.beta))
        .collect();
    ScoreVector::new(
        values,
        Orientation::InlierHigh,
        format!("{}+{}", base.source(), evidence.source()),
    )
}

/// Threshold on an inlier-oriented score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorThreshold {
    lambda: f64,
}

impl DetectorThreshold {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "threshold must be finite, got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Normal iff the inlier score is at least the threshold.
pub fn revised_detector(scores: &ScoreVector, threshold: DetectorThreshold) -> Vec<Label> {
    scores
        .reorient(Orientation::InlierHigh)
        .values()
        .iter()
        .map(|&s| {
            if s >= threshold.lambda() {
                Label::Normal
            } else {
                Label::Anomalous
            }
        })
        .collect()
}
