//! Score-based anomaly detectors.
//!
//! Every detector here emits anomaly-high scores. They serve two roles: as the
//! (possibly contaminated) base model fitted on training data, and as a
//! transductive evidence function fitted and scored on the test batch.

pub mod adam;
pub mod iforest;
pub mod knn;
pub mod lof;
pub mod rbf_svdd;

use ndarray::{ArrayView1, ArrayView2};

use crate::data::ScoreVector;
use crate::error::{Error, Result};

pub use iforest::{average_path_length, IsolationForest, IsolationForestParams};
pub use knn::KnnDistanceModel;
pub use lof::LofModel;
pub use rbf_svdd::{RbfSvddModel, RbfSvddParams};

/// A fitted model that scores query rows.
pub trait ScoreModel: Send + Sync {
    fn n_features(&self) -> usize;

    fn score(&self, queries: ArrayView2<'_, f64>) -> Result<ScoreVector>;
}

pub(crate) fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn check_dims(expected: usize, queries: ArrayView2<'_, f64>) -> Result<()> {
    if queries.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: queries.ncols(),
        });
    }
    Ok(())
}
