//! Fusion of precomputed `index,score` files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::calibration::{fuse_ada, AdaConfig};
use crate::data::{
    fmt_sig6, read_label_file, read_score_file, Normalization, Orientation, ScoreVector,
};
use crate::error::{Error, Result};
use crate::eval::auroc;
use crate::fusion::{fuse_scores, FusionConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaChoice {
    Fixed(f64),
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuseFilesRequest {
    pub base: PathBuf,
    pub base_orientation: Orientation,
    pub evidence: PathBuf,
    pub evidence_orientation: Orientation,
    pub labels: Option<PathBuf>,
    pub beta: BetaChoice,
    pub normalization: Normalization,
    pub ada: AdaConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedFile {
    /// Inlier-high.
    pub scores: ScoreVector,
    pub beta_used: f64,
    pub auroc: Option<f64>,
}

pub fn fuse_files(req: &FuseFilesRequest) -> Result<FusedFile> {
    let base = read_score_file(&req.base, req.base_orientation)?;
    let evidence = read_score_file(&req.evidence, req.evidence_orientation)?;
    if base.len() != evidence.len() {
        return Err(Error::Data(format!(
            "{} has {} scores but {} has {}",
            req.base.display(),
            base.len(),
            req.evidence.display(),
            evidence.len()
        )));
    }
    let (scores, beta_used) = match req.beta {
        BetaChoice::Fixed(beta) => (
            fuse_scores(
                &base,
                &evidence,
                &FusionConfig::new(beta, req.normalization)?,
            )?,
            beta,
        ),
        BetaChoice::Adaptive => {
            let f = fuse_ada(&base, &evidence, req.normalization, &req.ada)?;
            (f.scores, f.beta_used)
        }
    };
    let auroc = match &req.labels {
        Some(path) => {
            let labels = read_label_file(path)?;
            if labels.len() != scores.len() {
                return Err(Error::Data(format!(
                    "{} has {} labels for {} scores",
                    path.display(),
                    labels.len(),
                    scores.len()
                )));
            }
            Some(auroc(&scores, &labels)?)
        }
        None => None,
    };
    Ok(FusedFile {
        scores,
        beta_used,
        auroc,
    })
}

/// `index,fused_score,beta_used` rows.
pub fn fused_csv(fused: &FusedFile) -> String {
    let beta = fmt_sig6(fused.beta_used);
    let mut out = String::from("index,fused_score,beta_used\n");
    for (i, v) in fused.scores.values().iter().enumerate() {
        let _ = writeln!(out, "{i},{},{beta}", fmt_sig6(*v));
    }
    out
}

pub fn write_fused_scores(path: &Path, fused: &FusedFile) -> Result<()> {
    super::report::write_file(path, &fused_csv(fused))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::beta_ada;

    fn score_file(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
        let mut s = String::from("index,score\n");
        for (i, v) in values.iter().enumerate() {
            s.push_str(&format!("{i},{v}\n"));
        }
        let p = dir.join(name);
        std::fs::write(&p, s).unwrap();
        p
    }

    fn request(base: PathBuf, evidence: PathBuf, beta: BetaChoice) -> FuseFilesRequest {
        FuseFilesRequest {
            base,
            base_orientation: Orientation::InlierHigh,
            evidence,
            evidence_orientation: Orientation::InlierHigh,
            labels: None,
            beta,
            normalization: Normalization::None,
            ada: AdaConfig::default(),
        }
    }

    #[test]
    fn same_file_beta_one_doubles() {
        let dir = tempfile::tempdir().unwrap();
        let p = score_file(dir.path(), "s.csv", &[0.5, -1.0, 2.0]);
        let f = fuse_files(&request(p.clone(), p.clone(), BetaChoice::Fixed(1.0))).unwrap();
        assert_eq!(f.scores.values(), &[1.0, -2.0, 4.0]);
        assert_eq!(
            fused_csv(&f),
            "index,fused_score,beta_used\n0,1,1\n1,-2,1\n2,4,1\n"
        );
        let mut r = request(p.clone(), p, BetaChoice::Fixed(1.0));
        r.base_orientation = Orientation::AnomalyHigh;
        r.evidence_orientation = Orientation::AnomalyHigh;
        assert_eq!(fuse_files(&r).unwrap().scores.values(), &[-1.0, 2.0, -4.0]);
    }

    #[test]
    fn adaptive_reports_the_calibrated_beta() {
        let dir = tempfile::tempdir().unwrap();
        let b = score_file(dir.path(), "b.csv", &[0.1, 0.4, 0.4, 0.9, 0.3]);
        let e = score_file(dir.path(), "e.csv", &[3.0, 1.0, 2.0, 2.0, 2.0]);
        let f = fuse_files(&request(b.clone(), e.clone(), BetaChoice::Adaptive)).unwrap();
        let want = beta_ada(
            &read_score_file(&b, Orientation::InlierHigh).unwrap(),
            &read_score_file(&e, Orientation::InlierHigh).unwrap(),
            &AdaConfig::default(),
        )
        .unwrap();
        assert_eq!(f.beta_used, want);
    }

    #[test]
    fn gaps_lengths_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let b = score_file(dir.path(), "b.csv", &[0.1, 0.2, 0.3]);
        let gap = dir.path().join("gap.csv");
        std::fs::write(&gap, "index,score\n0,1\n2,3\n").unwrap();
        let err = fuse_files(&request(b.clone(), gap, BetaChoice::Fixed(1.0))).unwrap_err();
        assert!(err.to_string().contains("missing index 1"), "{err}");
        let short = score_file(dir.path(), "short.csv", &[0.1, 0.2]);
        assert!(fuse_files(&request(b.clone(), short, BetaChoice::Fixed(1.0))).is_err());

        let labels = dir.path().join("labels.csv");
        std::fs::write(&labels, "index,label\n0,1\n1,0\n2,0\n").unwrap();
        let mut r = request(b.clone(), b, BetaChoice::Fixed(1.0));
        r.labels = Some(labels);
        // lowest inlier score is the anomaly
        assert_eq!(fuse_files(&r).unwrap().auroc, Some(1.0));
    }
}
