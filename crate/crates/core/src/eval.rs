//! Threshold-free evaluation and per-group aggregation.

use serde::{Deserialize, Serialize};

use crate::data::{Label, Orientation, ScoreVector};
use crate::error::{Error, Result};

/// Midranks (1-based) of `values`; tied entries share the mean of their ranks.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + 1 + j) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = rank;
        }
        i = j;
    }
    ranks
}

/// Probability that a random anomaly outranks a random normal sample (ties
/// count one half), via the Mann-Whitney rank-sum.
pub fn auroc(scores: &ScoreVector, labels: &[Label]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let n_anom = labels.iter().filter(|l| l.is_anomalous()).count();
    let n_norm = labels.len() - n_anom;
    if n_anom == 0 || n_norm == 0 {
        return Err(Error::Data(format!(
            "AUROC needs both classes (got {n_anom} anomalous, {n_norm} normal)"
        )));
    }
    let s = scores.reorient(Orientation::AnomalyHigh);
    let ranks = midranks(s.values());
    let rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, l)| l.is_anomalous())
        .map(|(r, _)| r)
        .sum();
    let a = n_anom as f64;
    let u = rank_sum - a * (a + 1.0) / 2.0;
    Ok((u / (a * n_norm as f64)).clamp(0.0, 1.0))
}

/// Kendall tau-a: (concordant - discordant) / (n choose 2); tied pairs add 0.
pub fn kendall_tau(a: &ScoreVector, b: &ScoreVector) -> Result<f64> {
    let (x, y) = (a.values(), b.values());
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::Data("Kendall tau needs at least 2 samples".into()));
    }
    let mut net: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i].total_cmp(&x[j]) as i64;
            let dy = y[i].total_cmp(&y[j]) as i64;
            let tie_x = x[i] == x[j];
            let tie_y = y[i] == y[j];
            if !tie_x && !tie_y {
                net += dx * dy;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(net as f64 / pairs)
}

/// Spearman correlation: Pearson correlation of midranks. `None` when either
/// side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = midranks(x);
    let ry = midranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Scoring route applied to a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Blind,
    Refine,
    EvidenceOnly,
    Ephad,
    EphadAda,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Blind => "blind",
            Method::Refine => "refine",
            Method::EvidenceOnly => "evidence_only",
            Method::Ephad => "ephad",
            Method::EphadAda => "ephad_ada",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluated (dataset, detector, evidence, method, beta, epsilon, seed)
/// combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub dataset: String,
    pub detector: String,
    pub evidence: String,
    pub method: Method,
    /// Temperature used; `None` for methods that do not fuse.
    pub beta: Option<f64>,
    pub epsilon: f64,
    pub realized_epsilon: f64,
    pub seed: u64,
    /// Sweep axis name and value, when the cell belongs to a sweep.
    pub axis: Option<(String, f64)>,
    pub auroc: f64,
}

impl Cell {
    /// Grouping key: every field except the seed (and the per-seed realized
    /// temperature of the adaptive method).
    fn group_key(&self) -> GroupKey {
        let beta = match (self.method, self.beta) {
            (Method::EphadAda, _) => "ada".to_string(),
            (_, Some(b)) => crate::data::fmt_sig6(b),
            (_, None) => "-".to_string(),
        };
        GroupKey {
            dataset: self.dataset.clone(),
            detector: self.detector.clone(),
            evidence: self.evidence.clone(),
            method: self.method,
            beta,
            epsilon: crate::data::fmt_sig6(self.epsilon),
            axis: self
                .axis
                .as_ref()
                .map(|(name, v)| format!("{name}={}", crate::data::fmt_sig6(*v))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub dataset: String,
    pub detector: String,
    pub evidence: String,
    pub method: Method,
    pub beta: String,
    pub epsilon: String,
    pub axis: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub key: GroupKey,
    pub n_seeds: usize,
    pub mean: f64,
    /// Sample standard deviation over seeds divided by sqrt(#seeds); 0 when
    /// only one seed is present (see `se_defined`).
    pub se: f64,
    pub se_defined: bool,
    /// Mean realized temperature (adaptive method only).
    pub mean_beta: Option<f64>,
}

/// Mean and standard error per group, in order of first appearance.
pub fn aggregate(cells: &[Cell]) -> Vec<Aggregate> {
    let mut keys: Vec<GroupKey> = Vec::new();
    let mut members: Vec<Vec<&Cell>> = Vec::new();
    for c in cells {
        let k = c.group_key();
        match keys.iter().position(|x| *x == k) {
            Some(i) => members[i].push(c),
            None => {
                keys.push(k);
                members.push(vec![c]);
            }
        }
    }
    keys.into_iter()
        .zip(members)
        .map(|(key, group)| {
            let n = group.len();
            let mean = group.iter().map(|c| c.auroc).sum::<f64>() / n as f64;
            let (se, se_defined) = if n > 1 {
                let var =
                    group.iter().map(|c| (c.auroc - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var.sqrt() / (n as f64).sqrt(), true)
            } else {
                (0.0, false)
            };
            let mean_beta = (key.method == Method::EphadAda)
                .then(|| group.iter().filter_map(|c| c.beta).sum::<f64>() / n as f64);
            Aggregate {
                key,
                n_seeds: n,
                mean,
                se,
                se_defined,
                mean_beta,
            }
        })
        .collect()
}
