use ndarray::{Array2, ArrayView2};

use super::{check_dims, euclidean, ScoreModel};
use crate::data::{Orientation, ScoreVector, TabularDataset};
use crate::error::{Error, Result};

/// Anomaly score = Euclidean distance to the k-th nearest reference point.
#[derive(Debug, Clone)]
pub struct KnnDistanceModel {
    reference: Array2<f64>,
    k: usize,
}

impl KnnDistanceModel {
    pub fn fit(data: &TabularDataset, k: usize) -> Result<Self> {
        Self::fit_matrix(data.features(), k)
    }

    pub fn fit_matrix(reference: ArrayView2<'_, f64>, k: usize) -> Result<Self> {
        let m = reference.nrows();
        if k == 0 || k > m {
            return Err(Error::InvalidParameter(format!(
                "k-NN distance needs 1 <= k <= n, got k={k}, n={m}"
            )));
        }
        Ok(Self {
            reference: reference.to_owned(),
            k,
        })
    }
}

impl ScoreModel for KnnDistanceModel {
    fn n_features(&self) -> usize {
        self.reference.ncols()
    }

    fn score(&self, queries: ArrayView2<'_, f64>) -> Result<ScoreVector> {
        check_dims(self.reference.ncols(), queries)?;
        let mut buf = Vec::with_capacity(self.reference.nrows());
        let values = queries
            .rows()
            .into_iter()
            .map(|q| {
                buf.clear();
                buf.extend(self.reference.rows().into_iter().map(|r| euclidean(q, r)));
                *buf.select_nth_unstable_by(self.k - 1, f64::total_cmp).1
            })
            .collect();
        ScoreVector::new(values, Orientation::AnomalyHigh, "knn")
    }
}
