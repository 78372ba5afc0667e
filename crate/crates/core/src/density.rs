//! Discretized densities for checking exponential tilting numerically.
//!
//! A [`DiscreteDensity`] is a probability vector over the cells of a uniform
//! grid (1-D or 2-D), built by midpoint quadrature. Tilting, KL divergence and
//! the KL-regularized objective operate on these vectors directly; score
//! fusion never goes through this module.

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDensity {
    /// Cell midpoints, one row per cell.
    support: Vec<Vec<f64>>,
    /// Cell volume (width in 1-D, area in 2-D).
    cell_volume: f64,
    probs: Vec<f64>,
}

/// Numerically stable `ln(sum_k w_k exp(a_k))` over entries with `w_k > 0`.
fn log_weighted_sum_exp(weights: &[f64], exponents: &[f64]) -> f64 {
    let max = weights
        .iter()
        .zip(exponents)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, a)| *a)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = weights
        .iter()
        .zip(exponents)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, a)| w * (a - max).exp())
        .sum();
    max + s.ln()
}

impl DiscreteDensity {
    /// Normalize non-negative weights into a density.
    pub fn from_weights(
        support: Vec<Vec<f64>>,
        cell_volume: f64,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: support.len(),
                right: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Density(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Density(
                "total mass is zero; cannot normalize".into(),
            ));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            support,
            cell_volume,
            probs,
        })
    }

    /// Density over abstract states `0..k` (unit cells).
    pub fn from_probabilities(probs: Vec<f64>) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::Density(format!(
                "probabilities must be >= 0 and sum to 1 (sum = {sum})"
            )));
        }
        let support = (0..probs.len()).map(|k| vec![k as f64]).collect();
        Ok(Self {
            support,
            cell_volume: 1.0,
            probs,
        })
    }

    /// Midpoint quadrature of `pdf` over `cells` uniform cells on `[lo, hi]`.
    pub fn grid_1d(lo: f64, hi: f64, cells: usize, pdf: impl Fn(f64) -> f64) -> Result<Self> {
        let (support, width) = grid_1d_support(lo, hi, cells)?;
        let weights = support.iter().map(|x| pdf(x[0]) * width).collect();
        Self::from_weights(support, width, weights)
    }

    /// Midpoint quadrature over a `cells x cells` grid on `[lo, hi]^2`.
    pub fn grid_2d(lo: f64, hi: f64, cells: usize, pdf: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let (axis, width) = grid_1d_support(lo, hi, cells)?;
        let support: Vec<Vec<f64>> = axis
            .iter()
            .flat_map(|x| axis.iter().map(move |y| vec![x[0], y[0]]))
            .collect();
        let area = width * width;
        let weights = support.iter().map(|p| pdf(p[0], p[1]) * area).collect();
        Self::from_weights(support, area, weights)
    }

    /// Same grid, new weights.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        Self::from_weights(self.support.clone(), self.cell_volume, weights)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Evaluate `f` at each cell midpoint (e.g. an evidence function).
    pub fn evaluate(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        self.support.iter().map(|x| f(x)).collect()
    }

    /// Mixture `w * self + (1 - w) * other` on a shared grid.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        check_aligned(self, other)?;
        let weights = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| w * a + (1.0 - w) * b)
            .collect();
        self.reweighted(weights)
    }

    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        check_aligned(self, other)?;
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

fn grid_1d_support(lo: f64, hi: f64, cells: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    if cells == 0 || !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "grid needs cells >= 1 and hi > lo (got {cells} cells on [{lo}, {hi}])"
        )));
    }
    let width = (hi - lo) / cells as f64;
    let support = (0..cells)
        .map(|k| vec![lo + (k as f64 + 0.5) * width])
        .collect();
    Ok((support, width))
}

fn check_aligned(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(())
}

fn check_evidence(p: &DiscreteDensity, evidence: &[f64], beta: f64) -> Result<()> {
    if evidence.len() != p.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: evidence.len(),
        });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    if evidence.iter().any(|t| !t.is_finite()) {
        return Err(Error::Density("evidence values must be finite".into()));
    }
    Ok(())
}

/// Exponential tilt: `q_k ∝ p_k exp(T_k / beta)`, computed with a max shift.
pub fn tilt_density(
    base: &DiscreteDensity,
    evidence: &[f64],
    beta: f64,
) -> Result<DiscreteDensity> {
    check_evidence(base, evidence, beta)?;
    let exps: Vec<f64> = evidence.iter().map(|t| t / beta).collect();
    let max = base
        .probs
        .iter()
        .zip(&exps)
        .filter(|(p, _)| **p > 0.0)
        .map(|(_, a)| *a)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Density(
            "tilted mass is zero; cannot normalize".into(),
        ));
    }
    let weights = base
        .probs
        .iter()
        .zip(&exps)
        .map(|(p, a)| if *p > 0.0 { p * (a - max).exp() } else { 0.0 })
        .collect();
    base.reweighted(weights)
}

/// `KL(p || q) = sum p_k ln(p_k / q_k)`, with `0 ln 0 = 0`.
pub fn kl_divergence(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<f64> {
    check_aligned(p, q)?;
    let mut total = 0.0;
    for (k, (&pk, &qk)) in p.probs.iter().zip(&q.probs).enumerate() {
        if pk == 0.0 {
            continue;
        }
        if qk == 0.0 {
            return Err(Error::Density(format!(
                "p is not absolutely continuous w.r.t. q at cell {k}"
            )));
        }
        total += pk * (pk / qk).ln();
    }
    Ok(total.max(0.0))
}

/// Terms of the KL-improvement condition for tilting `f_mix` towards `f_plus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltCondition {
    /// `E_{f_plus}[T / beta] - ln Z`, with `Z = E_{f_mix}[exp(T / beta)]`.
    pub condition_value: f64,
    /// `KL(f_plus || f_mix)`
    pub kl_before: f64,
    /// `KL(f_plus || tilt(f_mix))`
    pub kl_after: f64,
}

impl TiltCondition {
    pub fn kl_reduction(&self) -> f64 {
        self.kl_before - self.kl_after
    }
}

pub fn lemma1_condition(
    f_plus: &DiscreteDensity,
    f_mix: &DiscreteDensity,
    evidence: &[f64],
    beta: f64,
) -> Result<TiltCondition> {
    check_aligned(f_plus, f_mix)?;
    check_evidence(f_mix, evidence, beta)?;
    let exps: Vec<f64> = evidence.iter().map(|t| t / beta).collect();
    let log_z = log_weighted_sum_exp(&f_mix.probs, &exps);
    let expected: f64 = f_plus.probs.iter().zip(&exps).map(|(p, a)| p * a).sum();
    let kl_before = kl_divergence(f_plus, f_mix)?;
    let tilted = tilt_density(f_mix, evidence, beta)?;
    let kl_after = kl_divergence(f_plus, &tilted)?;
    Ok(TiltCondition {
        condition_value: expected - log_z,
        kl_before,
        kl_after,
    })
}

/// `J(q) = E_q[T] - beta KL(q || base)`.
pub fn kl_objective(
    candidate: &DiscreteDensity,
    base: &DiscreteDensity,
    evidence: &[f64],
    beta: f64,
) -> Result<f64> {
    check_aligned(candidate, base)?;
    check_evidence(base, evidence, beta)?;
    let reward: f64 = candidate
        .probs
        .iter()
        .zip(evidence)
        .map(|(q, t)| q * t)
        .sum();
    Ok(reward - beta * kl_divergence(candidate, base)?)
}
