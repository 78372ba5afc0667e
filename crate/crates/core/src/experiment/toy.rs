//! Two-dimensional toy comparison: a one-class RBF model trained on
//! contaminated data (blind), the same model with iterative filtering
//! (refine), and the blind model fused with transductive LOF evidence.

use ndarray::Array2;
use rayon::prelude::*;

use super::{
    round_count, score_cells, settings, CellContext, ExperimentConfig, Setting, SweepAxis,
};
use crate::contamination::{anomaly_count, sample_toy};
use crate::data::{Orientation, ScoreVector, TabularDataset};
use crate::detectors::lof::lof_transductive;
use crate::detectors::{LofModel, RbfSvddModel, ScoreModel};
use crate::error::Result;
use crate::eval::{auroc, Cell, Method};
use crate::fusion::FusionScalers;
use crate::rng::SeedStream;

/// Blind and fused anomaly scores over a regular grid, for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Anomaly-high.
    pub blind_score: Vec<f64>,
    /// Anomaly-high (negated fused inlier score).
    pub fused_score: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyOutcome {
    pub cells: Vec<Cell>,
    /// Grid for the first seed of the first setting (plain runs only).
    pub grid: Option<ScoreGrid>,
}

const DATASET: &str = "toy2d";
const DETECTOR: &str = "rbf_svdd";
const EVIDENCE: &str = "lof";

struct ToyUnit {
    cells: Vec<Cell>,
    grid: Option<ScoreGrid>,
}

pub fn run_toy(cfg: &ExperimentConfig, axis: Option<SweepAxis>) -> Result<ToyOutcome> {
    cfg.validate()?;
    let settings = settings(cfg, axis)?;
    let jobs: Vec<(usize, &Setting, u64)> = settings
        .iter()
        .enumerate()
        .flat_map(|(i, s)| cfg.toy.seeds.iter().map(move |&seed| (i, s, seed)))
        .collect();
    let first_seed = cfg.toy.seeds[0];
    let units = jobs
        .par_iter()
        .map(|&(i, setting, seed)| {
            run_unit(
                cfg,
                setting,
                seed,
                axis.is_none() && i == 0 && seed == first_seed,
            )
        })
        .collect::<Result<Vec<ToyUnit>>>()?;
    let mut cells = Vec::new();
    let mut grid = None;
    for unit in units {
        cells.extend(unit.cells);
        if grid.is_none() {
            grid = unit.grid;
        }
    }
    Ok(ToyOutcome { cells, grid })
}

/// Training composition for `n_train` points at contamination `epsilon`:
/// `round(n (1 - eps))` normals plus the matching anomaly count.
fn train_counts(n_train: usize, epsilon: f64) -> Result<(usize, usize)> {
    let m = round_count(n_train as f64 * (1.0 - epsilon));
    Ok((m, anomaly_count(m, epsilon)?))
}

fn test_counts(cfg: &ExperimentConfig, fraction: Option<f64>) -> (usize, usize) {
    let t = &cfg.toy;
    match fraction {
        None => (t.n_test_normal, t.n_test_anomalous),
        Some(f) => {
            let n = t.n_test_normal + t.n_test_anomalous;
            let a = round_count(f * n as f64).clamp(1, n - 1);
            (n - a, a)
        }
    }
}

fn run_unit(
    cfg: &ExperimentConfig,
    setting: &Setting,
    seed: u64,
    with_grid: bool,
) -> Result<ToyUnit> {
    let t = &cfg.toy;
    let root = SeedStream::new(cfg.seed).named(DATASET).child(seed);
    let (m, a) = train_counts(t.n_train, setting.epsilon)?;
    let train = sample_toy(&t.generator, m, a, &root.named("train"))?;
    let (tn, ta) = test_counts(cfg, setting.test_fraction);
    let test = sample_toy(&t.generator, tn, ta, &root.named("test"))?;
    let labels = test.require_labels()?;

    let model_seed = root.named("model");
    let blind = RbfSvddModel::fit(&train.unlabeled(), t.model, &model_seed)?;
    let base = blind.score(test.features())?;
    let evidence = lof_transductive(test.features(), t.lof_k)?;

    let refine_auroc = if t.methods.contains(&Method::Refine) {
        let model = refine(&train.unlabeled(), cfg, setting.epsilon, &model_seed)?;
        Some(auroc(&model.score(test.features())?, labels)?)
    } else {
        None
    };

    let ctx = CellContext {
        dataset: DATASET,
        detector: DETECTOR,
        evidence: EVIDENCE,
        setting,
        realized_epsilon: a as f64 / (m + a) as f64,
        seed,
    };
    let cells = score_cells(
        &ctx,
        cfg,
        &t.methods,
        &base,
        &evidence,
        labels,
        refine_auroc,
    )?;
    let grid = if with_grid {
        Some(score_grid(
            cfg,
            &blind,
            &test,
            &base,
            &evidence,
            setting.betas[0],
        )?)
    } else {
        None
    };
    Ok(ToyUnit { cells, grid })
}

/// Fit, keep the `(1 - eps)` lowest-scored training rows, refit; repeated
/// `refine_rounds` times. Each round filters the full training set with the
/// latest model.
fn refine(
    train: &TabularDataset,
    cfg: &ExperimentConfig,
    epsilon: f64,
    seed: &SeedStream,
) -> Result<RbfSvddModel> {
    let n = train.n_samples();
    let drop = round_count(epsilon * n as f64).min(n - 1);
    let mut kept = train.clone();
    let mut model = RbfSvddModel::fit(&kept, cfg.toy.model, seed)?;
    for _ in 0..cfg.toy.refine_rounds {
        let scores = model.score(train.features())?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            scores.values()[i]
                .total_cmp(&scores.values()[j])
                .then(i.cmp(&j))
        });
        let mut keep = order[..n - drop].to_vec();
        keep.sort_unstable();
        kept = train.select(&keep)?;
        model = RbfSvddModel::fit(&kept, cfg.toy.model, seed)?;
    }
    Ok(model)
}

fn score_grid(
    cfg: &ExperimentConfig,
    blind: &RbfSvddModel,
    test: &TabularDataset,
    base: &ScoreVector,
    evidence: &ScoreVector,
    beta: f64,
) -> Result<ScoreGrid> {
    let t = &cfg.toy;
    let (lo, hi) = t.grid_range;
    let cells = t.grid_cells;
    let step = (hi - lo) / (cells - 1) as f64;
    let mut pts = Array2::zeros((cells * cells, 2));
    for i in 0..cells {
        for j in 0..cells {
            pts[[i * cells + j, 0]] = lo + j as f64 * step;
            pts[[i * cells + j, 1]] = lo + i as f64 * step;
        }
    }
    let blind_grid = blind.score(pts.view())?;
    // evidence at grid points is LOF against the test batch
    let ev_grid = LofModel::fit_matrix(test.features(), t.lof_k)?.score(pts.view())?;
    let scalers = FusionScalers::fit(base, evidence, cfg.normalization)?;
    let b_in = blind_grid.reorient(Orientation::InlierHigh);
    let e_in = ev_grid.reorient(Orientation::InlierHigh);
    let fused = b_in
        .values()
        .iter()
        .zip(e_in.values())
        .map(|(&b, &e)| -scalers.fuse_one(b, e, beta))
        .collect();
    Ok(ScoreGrid {
        x: pts.column(0).to_vec(),
        y: pts.column(1).to_vec(),
        blind_score: blind_grid.into_values(),
        fused_score: fused,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.toy.model.epochs = 20;
        cfg.toy.seeds = vec![0, 1];
        cfg.toy.grid_cells = 5;
        cfg
    }

    #[test]
    fn train_composition() {
        assert_eq!(train_counts(100, 0.1).unwrap(), (90, 10));
        assert_eq!(train_counts(100, 0.0).unwrap(), (100, 0));
        assert_eq!(train_counts(100, 0.05).unwrap(), (95, 5));
        assert_eq!(train_counts(100, 0.15).unwrap(), (85, 15));
    }

    #[test]
    fn three_methods_per_seed_and_a_grid() {
        let cfg = quick_cfg();
        let out = run_toy(&cfg, None).unwrap();
        assert_eq!(out.cells.len(), 3 * 2);
        let methods: Vec<Method> = out.cells.iter().map(|c| c.method).collect();
        assert_eq!(
            methods,
            vec![
                Method::Blind,
                Method::Refine,
                Method::Ephad,
                Method::Blind,
                Method::Refine,
                Method::Ephad
            ]
        );
        assert!(out.cells.iter().all(|c| (0.0..=1.0).contains(&c.auroc)));
        assert!(out
            .cells
            .iter()
            .all(|c| (c.realized_epsilon - 0.1).abs() < 1e-12));
        let grid = out.grid.unwrap();
        assert_eq!(grid.x.len(), 25);
        assert_eq!((grid.x[0], grid.y[0]), (-2.0, -2.0));
        assert_eq!((grid.x[24], grid.y[24]), (3.0, 3.0));
        assert!(grid.blind_score.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = quick_cfg();
        let a = super::super::with_threads(Some(1), || run_toy(&cfg, None))
            .unwrap()
            .unwrap();
        let b = super::super::with_threads(Some(3), || run_toy(&cfg, None))
            .unwrap()
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn test_fraction_keeps_size() {
        let cfg = quick_cfg();
        for f in [0.05, 0.1, 0.2] {
            let (n, a) = test_counts(&cfg, Some(f));
            assert_eq!(n + a, 210);
            assert_eq!(a, round_count(f * 210.0));
        }
    }
}
