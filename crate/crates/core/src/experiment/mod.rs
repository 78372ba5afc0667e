//! Config-driven pipelines: the 2-D toy comparison, tabular benchmark runs,
//! one-axis sweeps, and fusion of precomputed score files.
//!
//! Every cell is a pure function of the config and the master seed. Cells run
//! in parallel and are collected in a fixed order, so output files are
//! byte-identical across runs and thread counts.

mod files;
mod report;
mod tabular;
mod toy;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::AdaConfig;
use crate::contamination::{validate_epsilon, ToySpec};
use crate::data::{Normalization, Orientation};
use crate::detectors::{IsolationForestParams, RbfSvddParams};
use crate::error::{Error, Result};
use crate::eval::Method;

pub use files::{
    fuse_files, fused_csv, write_fused_scores, BetaChoice, FuseFilesRequest, FusedFile,
};
pub use report::{write_grid, RealizedEpsilon, Report, RunMeta};
pub use tabular::{run_tabular, split_dataset, TabularSplit};
pub use toy::{run_toy, ScoreGrid, ToyOutcome};

/// Base detector fitted on the (contaminated) training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DetectorSpec {
    Iforest {
        #[serde(default = "default_trees")]
        tree_count: usize,
        #[serde(default = "default_subsample")]
        subsample_size: usize,
    },
    Lof {
        #[serde(default = "default_tabular_k")]
        k: usize,
    },
    Knn {
        #[serde(default = "default_knn_k")]
        k: usize,
    },
}

impl DetectorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorSpec::Iforest { .. } => "iforest",
            DetectorSpec::Lof { .. } => "lof",
            DetectorSpec::Knn { .. } => "knn",
        }
    }
}

/// Evidence computed on the test batch, or read from a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvidenceSpec {
    Lof {
        #[serde(default = "default_tabular_k")]
        k: usize,
    },
    Iforest {
        #[serde(default = "default_trees")]
        tree_count: usize,
        #[serde(default = "default_subsample")]
        subsample_size: usize,
    },
    /// `index,score` file whose indices are rows of the original dataset.
    File {
        path: PathBuf,
        orientation: Orientation,
        #[serde(default)]
        name: Option<String>,
    },
}

impl EvidenceSpec {
    pub fn name(&self) -> String {
        match self {
            EvidenceSpec::Lof { .. } => "lof".into(),
            EvidenceSpec::Iforest { .. } => "iforest".into(),
            EvidenceSpec::File { name: Some(n), .. } => n.clone(),
            EvidenceSpec::File { path, .. } => path
                .file_stem()
                .map_or_else(|| "file".into(), |s| s.to_string_lossy().into_owned()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: PathBuf,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyConfig {
    pub generator: ToySpec,
    /// Contaminated training points (normals plus injected anomalies).
    pub n_train: usize,
    pub n_test_normal: usize,
    pub n_test_anomalous: usize,
    pub lof_k: usize,
    pub model: RbfSvddParams,
    pub refine_rounds: usize,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub grid_cells: usize,
    pub grid_range: (f64, f64),
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            generator: ToySpec::default(),
            n_train: 100,
            n_test_normal: 200,
            n_test_anomalous: 10,
            lof_k: 10,
            model: RbfSvddParams::default(),
            refine_rounds: 5,
            methods: vec![Method::Blind, Method::Refine, Method::Ephad],
            seeds: (0..5).collect(),
            grid_cells: 100,
            grid_range: (-2.0, 3.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every cell derives its own stream from it.
    pub seed: u64,
    /// Replicate indices for tabular runs.
    pub seeds: Vec<u64>,
    pub datasets: Vec<DatasetSpec>,
    pub toy: ToyConfig,
    pub detectors: Vec<DetectorSpec>,
    pub evidence: Vec<EvidenceSpec>,
    pub methods: Vec<Method>,
    pub betas: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// Anomaly share of the test set (sweep axis only).
    pub test_fractions: Vec<f64>,
    pub normalization: Normalization,
    pub delta: f64,
    /// Synthetic anomaly noise, as a multiple of the per-feature standard
    /// deviation of the normal training rows.
    pub noise_scale: f64,
    /// z-score features with statistics of the normal training rows.
    pub standardize: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            seeds: vec![0, 1, 2],
            datasets: Vec::new(),
            toy: ToyConfig::default(),
            detectors: vec![DetectorSpec::Iforest {
                tree_count: default_trees(),
                subsample_size: default_subsample(),
            }],
            evidence: vec![EvidenceSpec::Lof {
                k: default_tabular_k(),
            }],
            methods: vec![
                Method::Blind,
                Method::EvidenceOnly,
                Method::Ephad,
                Method::EphadAda,
            ],
            betas: vec![0.5],
            epsilons: vec![0.1],
            test_fractions: vec![0.05, 0.1, 0.15, 0.2],
            normalization: Normalization::Zscore,
            delta: AdaConfig::default().delta,
            noise_scale: 3.0,
            standardize: false,
            out_dir: None,
        }
    }
}

fn default_trees() -> usize {
    IsolationForestParams::default().tree_count
}

fn default_subsample() -> usize {
    IsolationForestParams::default().subsample_size
}

fn default_tabular_k() -> usize {
    20
}

fn default_knn_k() -> usize {
    5
}

fn default_label_column() -> String {
    "label".into()
}

/// Which grid a sweep walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Beta,
    Epsilon,
    TestFraction,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Beta => "beta",
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::TestFraction => "test_fraction",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(SweepAxis::Beta),
            "epsilon" => Ok(SweepAxis::Epsilon),
            "test-fraction" | "test_fraction" => Ok(SweepAxis::TestFraction),
            other => Err(Error::Config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.seeds.is_empty() || self.toy.seeds.is_empty() {
            return cfg_err("at least one seed is required".into());
        }
        if self.methods.is_empty() || self.toy.methods.is_empty() {
            return cfg_err("method set is empty".into());
        }
        if self.betas.is_empty() || self.epsilons.is_empty() || self.test_fractions.is_empty() {
            return cfg_err("betas, epsilons and test_fractions must be non-empty".into());
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return cfg_err(format!("beta values must be positive, got {b}"));
        }
        for &e in &self.epsilons {
            validate_epsilon(e).map_err(|err| Error::Config(err.to_string()))?;
        }
        if let Some(f) = self
            .test_fractions
            .iter()
            .find(|f| !(**f > 0.0 && **f < 1.0))
        {
            return cfg_err(format!("test fractions must lie in (0, 1), got {f}"));
        }
        if self.detectors.is_empty() || self.evidence.is_empty() {
            return cfg_err("detector and evidence lists must be non-empty".into());
        }
        if !(self.noise_scale > 0.0 && self.noise_scale.is_finite()) {
            return cfg_err(format!(
                "noise_scale must be positive, got {}",
                self.noise_scale
            ));
        }
        AdaConfig { delta: self.delta }
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        for d in &self.detectors {
            let ok = match d {
                DetectorSpec::Iforest {
                    tree_count,
                    subsample_size,
                } => *tree_count > 0 && *subsample_size > 0,
                DetectorSpec::Lof { k } | DetectorSpec::Knn { k } => *k > 0,
            };
            if !ok {
                return cfg_err(format!("invalid detector parameters: {d:?}"));
            }
        }
        let t = &self.toy;
        if t.n_train == 0
            || t.n_test_normal == 0
            || t.n_test_anomalous == 0
            || t.lof_k == 0
            || t.grid_cells < 2
        {
            return cfg_err("toy sizes, lof_k and grid_cells must be positive".into());
        }
        if !(t.grid_range.0 < t.grid_range.1) {
            return cfg_err(format!(
                "toy grid_range must be increasing, got {:?}",
                t.grid_range
            ));
        }
        if self.methods.contains(&Method::Refine) {
            return cfg_err("refine is only available for the toy pipeline".into());
        }
        for mix in [&t.generator.normal, &t.generator.anomalous] {
            crate::contamination::GaussianMixtureSpec::new(
                mix.components().to_vec(),
                mix.weights().to_vec(),
            )
            .map_err(|e| Error::Config(format!("toy generator: {e}")))?;
        }
        if t.generator.normal.dim() != 2 || t.generator.anomalous.dim() != 2 {
            return cfg_err("toy generator must be two-dimensional".into());
        }
        if t.methods.contains(&Method::Refine) && t.refine_rounds == 0 {
            return cfg_err("refine_rounds must be at least 1".into());
        }
        Ok(())
    }

    pub(crate) fn ada(&self) -> AdaConfig {
        AdaConfig { delta: self.delta }
    }

    /// Grid for `axis`; at least two points are required to sweep.
    pub fn axis_grid(&self, axis: SweepAxis) -> Result<&[f64]> {
        let grid = match axis {
            SweepAxis::Beta => &self.betas,
            SweepAxis::Epsilon => &self.epsilons,
            SweepAxis::TestFraction => &self.test_fractions,
        };
        if grid.len() < 2 {
            return Err(Error::Config(format!(
                "sweep over {} needs at least 2 grid points, got {}",
                axis.as_str(),
                grid.len()
            )));
        }
        Ok(grid)
    }
}

/// One point of the experiment grid shared by all seeds.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Setting {
    pub epsilon: f64,
    pub test_fraction: Option<f64>,
    pub betas: Vec<f64>,
    pub axis: Option<(String, f64)>,
}

/// Expand the config into settings: the full epsilon grid for a plain run,
/// or one setting per value of the swept axis (other axes at their first
/// value).
pub(crate) fn settings(cfg: &ExperimentConfig, axis: Option<SweepAxis>) -> Result<Vec<Setting>> {
    let eps0 = cfg.epsilons[0];
    let tag = |a: SweepAxis, v: f64| Some((a.as_str().to_string(), v));
    Ok(match axis {
        None => cfg
            .epsilons
            .iter()
            .map(|&epsilon| Setting {
                epsilon,
                test_fraction: None,
                betas: cfg.betas.clone(),
                axis: None,
            })
            .collect(),
        Some(a @ SweepAxis::Beta) => cfg
            .axis_grid(a)?
            .iter()
            .map(|&b| Setting {
                epsilon: eps0,
                test_fraction: None,
                betas: vec![b],
                axis: tag(a, b),
            })
            .collect(),
        Some(a @ SweepAxis::Epsilon) => cfg
            .axis_grid(a)?
            .iter()
            .map(|&epsilon| Setting {
                epsilon,
                test_fraction: None,
                betas: cfg.betas.clone(),
                axis: tag(a, epsilon),
            })
            .collect(),
        Some(a @ SweepAxis::TestFraction) => cfg
            .axis_grid(a)?
            .iter()
            .map(|&f| Setting {
                epsilon: eps0,
                test_fraction: Some(f),
                betas: cfg.betas.clone(),
                axis: tag(a, f),
            })
            .collect(),
    })
}

/// Cells for the score-only methods, given cached base and evidence scores.
/// `extra` supplies AUROCs of methods that need refitting (refine).
pub(crate) struct CellContext<'a> {
    pub dataset: &'a str,
    pub detector: &'a str,
    pub evidence: &'a str,
    pub setting: &'a Setting,
    pub realized_epsilon: f64,
    pub seed: u64,
}

pub(crate) fn score_cells(
    ctx: &CellContext<'_>,
    cfg: &ExperimentConfig,
    methods: &[Method],
    base: &crate::data::ScoreVector,
    evidence: &crate::data::ScoreVector,
    labels: &[crate::data::Label],
    refine_auroc: Option<f64>,
) -> Result<Vec<crate::eval::Cell>> {
    use crate::calibration::fuse_ada;
    use crate::eval::{auroc, Cell};
    use crate::fusion::{fuse_scores, FusionConfig};

    let cell = |method: Method, beta: Option<f64>, value: f64| Cell {
        dataset: ctx.dataset.to_string(),
        detector: ctx.detector.to_string(),
        evidence: ctx.evidence.to_string(),
        method,
        beta,
        epsilon: ctx.setting.epsilon,
        realized_epsilon: ctx.realized_epsilon,
        seed: ctx.seed,
        axis: ctx.setting.axis.clone(),
        auroc: value,
    };
    let mut out = Vec::new();
    for &m in methods {
        match m {
            Method::Blind => out.push(cell(m, None, auroc(base, labels)?)),
            Method::EvidenceOnly => out.push(cell(m, None, auroc(evidence, labels)?)),
            Method::Refine => {
                let v = refine_auroc.ok_or_else(|| {
                    Error::Config("refine is only available for the toy pipeline".into())
                })?;
                out.push(cell(m, None, v));
            }
            Method::Ephad => {
                for &beta in &ctx.setting.betas {
                    let fused =
                        fuse_scores(base, evidence, &FusionConfig::new(beta, cfg.normalization)?)?;
                    out.push(cell(m, Some(beta), auroc(&fused, labels)?));
                }
            }
            Method::EphadAda => {
                let ada = fuse_ada(base, evidence, cfg.normalization, &cfg.ada())?;
                out.push(cell(m, Some(ada.beta_used), auroc(&ada.scores, labels)?));
            }
        }
    }
    Ok(out)
}

/// Round half up to an integer count.
pub(crate) fn round_count(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}

/// Run `work` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(work()),
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(work))
        }
    }
}
