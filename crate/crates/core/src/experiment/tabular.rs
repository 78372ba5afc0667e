//! Tabular benchmark runs under the synthetic-noise contamination protocol.

use rayon::prelude::*;

use super::{
    round_count, score_cells, settings, CellContext, DetectorSpec, EvidenceSpec, ExperimentConfig,
    Setting, SweepAxis,
};
use crate::contamination::{contaminate_train, ContaminationSpec, Protocol};
use crate::data::{load_csv, read_score_file, FeatureScaler, Label, ScoreVector, TabularDataset};
use crate::detectors::lof::lof_transductive;
use crate::detectors::{
    IsolationForest, IsolationForestParams, KnnDistanceModel, LofModel, ScoreModel,
};
use crate::error::{Error, Result};
use crate::eval::Cell;
use crate::rng::SeedStream;

/// Normal rows for training and a labeled test set, with the original row
/// index of every test row.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularSplit {
    pub train_normals: TabularDataset,
    pub test: TabularDataset,
    pub test_rows: Vec<usize>,
}

/// Stratified split: a random half of the normal rows (rounded down) trains,
/// the other half plus every anomaly tests. Test rows keep dataset order.
pub fn split_dataset(ds: &TabularDataset, seed: &SeedStream) -> Result<TabularSplit> {
    let normals = ds.indices_with(Label::Normal);
    let anomalies = ds.indices_with(Label::Anomalous);
    if normals.len() < 2 || anomalies.is_empty() {
        return Err(Error::Data(format!(
            "dataset '{}' needs at least 2 normal and 1 anomalous rows (has {} and {})",
            ds.name(),
            normals.len(),
            anomalies.len()
        )));
    }
    let mut rng = seed.rng();
    let n_train = normals.len() / 2;
    let picked = rand::seq::index::sample(&mut rng, normals.len(), n_train);
    let mut train_rows: Vec<usize> = picked.into_iter().map(|i| normals[i]).collect();
    train_rows.sort_unstable();
    let test_rows: Vec<usize> = (0..ds.n_samples())
        .filter(|i| train_rows.binary_search(i).is_err())
        .collect();
    Ok(TabularSplit {
        train_normals: ds.select(&train_rows)?.unlabeled(),
        test: ds.select(&test_rows)?,
        test_rows,
    })
}

/// Largest test size that every fraction in `grid` can fill from `n_normal`
/// normal and `n_anomalous` anomalous test rows.
fn common_test_size(grid: &[f64], n_normal: usize, n_anomalous: usize) -> usize {
    grid.iter()
        .map(|&f| {
            let by_normal = n_normal as f64 / (1.0 - f);
            let by_anomalous = n_anomalous as f64 / f;
            (by_normal.min(by_anomalous) + 1e-9).floor() as usize
        })
        .min()
        .unwrap_or(0)
}

/// Resample the test set to `n` rows with anomaly share `fraction`.
fn resample_test(
    split: &TabularSplit,
    fraction: f64,
    n: usize,
    seed: &SeedStream,
) -> Result<TabularSplit> {
    let labels = split.test.require_labels()?;
    let pick = |label: Label, count: usize, name: &str| -> Result<Vec<usize>> {
        let pool: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        if count > pool.len() {
            return Err(Error::Data(format!(
                "test fraction {fraction} needs {count} {name} rows, have {}",
                pool.len()
            )));
        }
        Ok(
            rand::seq::index::sample(&mut seed.named(name).rng(), pool.len(), count)
                .into_iter()
                .map(|i| pool[i])
                .collect(),
        )
    };
    let a = round_count(fraction * n as f64).clamp(1, n.saturating_sub(1).max(1));
    let mut rows = pick(Label::Anomalous, a, "anomalous")?;
    rows.extend(pick(Label::Normal, n - a, "normal")?);
    rows.sort_unstable();
    Ok(TabularSplit {
        train_normals: split.train_normals.clone(),
        test: split.test.select(&rows)?,
        test_rows: rows.iter().map(|&r| split.test_rows[r]).collect(),
    })
}

struct Loaded {
    name: String,
    data: TabularDataset,
    /// Full-length external evidence, one entry per file evidence spec.
    files: Vec<Option<ScoreVector>>,
    test_size: Option<usize>,
}

fn load_all(cfg: &ExperimentConfig, axis: Option<SweepAxis>) -> Result<Vec<Loaded>> {
    if cfg.datasets.is_empty() {
        return Err(Error::Config("no datasets configured".into()));
    }
    cfg.datasets
        .iter()
        .map(|spec| {
            let data = load_csv(&spec.path, Some(&spec.label_column))?;
            let name = spec.name.clone().unwrap_or_else(|| data.name().to_string());
            let files = cfg
                .evidence
                .iter()
                .map(|ev| match ev {
                    EvidenceSpec::File {
                        path, orientation, ..
                    } => {
                        let scores = read_score_file(path, *orientation)?;
                        if scores.len() != data.n_samples() {
                            return Err(Error::Data(format!(
                                "{}: {} scores for {} rows of '{name}'",
                                path.display(),
                                scores.len(),
                                data.n_samples()
                            )));
                        }
                        Ok(Some(scores))
                    }
                    _ => Ok(None),
                })
                .collect::<Result<Vec<_>>>()?;
            let test_size = if axis == Some(SweepAxis::TestFraction) {
                // the split leaves ceil(normals / 2) normals and every anomaly in test
                let n_norm = data.indices_with(Label::Normal).len();
                let n_anom = data.indices_with(Label::Anomalous).len();
                let size = common_test_size(&cfg.test_fractions, n_norm - n_norm / 2, n_anom);
                if size < 2 {
                    return Err(Error::Data(format!(
                        "'{name}' is too small for the test-fraction grid"
                    )));
                }
                Some(size)
            } else {
                None
            };
            Ok(Loaded {
                name,
                data,
                files,
                test_size,
            })
        })
        .collect()
}

/// Run every (dataset, setting, seed) unit; cells come back in that order.
pub fn run_tabular(cfg: &ExperimentConfig, axis: Option<SweepAxis>) -> Result<Vec<Cell>> {
    cfg.validate()?;
    let settings = settings(cfg, axis)?;
    let loaded = load_all(cfg, axis)?;
    let jobs: Vec<(&Loaded, &Setting, u64)> = loaded
        .iter()
        .flat_map(|d| {
            settings
                .iter()
                .flat_map(move |s| cfg.seeds.iter().map(move |&seed| (d, s, seed)))
        })
        .collect();
    let units = jobs
        .par_iter()
        .map(|&(d, s, seed)| run_unit(cfg, d, s, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(units.into_iter().flatten().collect())
}

fn per_feature_std(x: ndarray::ArrayView2<'_, f64>) -> Vec<f64> {
    let ddof = if x.nrows() > 1 { 1.0 } else { 0.0 };
    x.var_axis(ndarray::Axis(0), ddof)
        .iter()
        .map(|v| v.sqrt())
        .collect()
}

fn run_unit(cfg: &ExperimentConfig, d: &Loaded, setting: &Setting, seed: u64) -> Result<Vec<Cell>> {
    let root = SeedStream::new(cfg.seed).named(&d.name).child(seed);
    let mut split = split_dataset(&d.data, &root.named("split"))?;
    if let (Some(f), Some(n)) = (setting.test_fraction, d.test_size) {
        split = resample_test(&split, f, n, &root.named("test-fraction"))?;
    }
    if cfg.standardize {
        let scaler = FeatureScaler::fit(split.train_normals.features());
        split.train_normals = split.train_normals.map_features(&scaler)?;
        split.test = split.test.map_features(&scaler)?;
    }
    // constant features get unit scale, as in the feature scaler
    let sigma: Vec<f64> = per_feature_std(split.train_normals.features())
        .into_iter()
        .map(|s| cfg.noise_scale * if s > 0.0 { s } else { 1.0 })
        .collect();
    let spec =
        ContaminationSpec::new(setting.epsilon, Protocol::SyntheticNoise)?.with_noise_sigma(sigma);
    let contaminated = contaminate_train(
        &split.train_normals,
        &split.test,
        &spec,
        &root.named("contaminate"),
    )?;
    let train = contaminated.train.train();
    let test = &contaminated.test_adjusted;
    let labels = test.require_labels()?;

    let evidence: Vec<ScoreVector> = cfg
        .evidence
        .iter()
        .zip(&d.files)
        .map(|(ev, file)| match (ev, file) {
            (EvidenceSpec::Lof { k }, _) => lof_transductive(test.features(), *k),
            (
                EvidenceSpec::Iforest {
                    tree_count,
                    subsample_size,
                },
                _,
            ) => {
                let params = IsolationForestParams {
                    tree_count: *tree_count,
                    subsample_size: *subsample_size,
                };
                IsolationForest::fit_matrix(
                    test.features(),
                    params,
                    &root.named("evidence-iforest"),
                )?
                .score(test.features())
            }
            (EvidenceSpec::File { .. }, Some(full)) => {
                let picked = split.test_rows.iter().map(|&r| full.values()[r]).collect();
                ScoreVector::new(picked, full.orientation(), full.source())
            }
            (EvidenceSpec::File { .. }, None) => unreachable!("file evidence is loaded up front"),
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for det in &cfg.detectors {
        let model: Box<dyn ScoreModel> = match det {
            DetectorSpec::Iforest {
                tree_count,
                subsample_size,
            } => Box::new(IsolationForest::fit(
                train,
                IsolationForestParams {
                    tree_count: *tree_count,
                    subsample_size: *subsample_size,
                },
                &root.named("detector-iforest"),
            )?),
            DetectorSpec::Lof { k } => Box::new(LofModel::fit(train, *k)?),
            DetectorSpec::Knn { k } => Box::new(KnnDistanceModel::fit(train, *k)?),
        };
        let base = model.score(test.features())?;
        for (ev_spec, ev) in cfg.evidence.iter().zip(&evidence) {
            let ev_name = ev_spec.name();
            let ctx = CellContext {
                dataset: &d.name,
                detector: det.name(),
                evidence: &ev_name,
                setting,
                realized_epsilon: contaminated.train.realized_epsilon(),
                seed,
            };
            cells.extend(score_cells(
                &ctx,
                cfg,
                &cfg.methods,
                &base,
                ev,
                labels,
                None,
            )?);
        }
    }
    Ok(cells)
}
