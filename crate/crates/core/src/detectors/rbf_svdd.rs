//! One-class hypersphere model on a three-unit RBF network (2-D inputs).
//!
//! `net(x) = sum_j w_j exp(-|x - mu_j|^2 / (2 s_j^2)) + b`, with the unit
//! centers `mu_j` frozen and `s_j = exp(u_j)` so scales stay positive. Training
//! minimizes the batch mean of `(net(x) - c)^2` over `u`, `w`, `b` and the
//! scalar hypersphere center `c` with Adam. The anomaly score of a point is
//! `(net(x) - c)^2`.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::{check_dims, ScoreModel};
use crate::data::{Orientation, ScoreVector, TabularDataset};
use crate::error::{Error, Result};
use crate::rng::SeedStream;

pub const N_UNITS: usize = 3;
/// log-scales, weights, bias, center
pub const N_PARAMS: usize = 2 * N_UNITS + 2;

const IDX_BIAS: usize = 2 * N_UNITS;
const IDX_CENTER: usize = 2 * N_UNITS + 1;

/// Means of the three toy mixture components.
pub const TOY_CENTERS: [[f64; 2]; N_UNITS] = [[1.0, 1.0], [-0.25, 2.5], [-1.0, 0.5]];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbfSvddParams {
    pub centers: [[f64; 2]; N_UNITS],
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
}

impl Default for RbfSvddParams {
    fn default() -> Self {
        Self {
            centers: TOY_CENTERS,
            epochs: 200,
            batch_size: 25,
            lr: 0.01,
        }
    }
}

/// Network output for one point.
pub fn net_output(
    centers: &[[f64; 2]; N_UNITS],
    params: &[f64; N_PARAMS],
    x: ArrayView1<'_, f64>,
) -> f64 {
    let mut out = params[IDX_BIAS];
    for j in 0..N_UNITS {
        let r2 = (x[0] - centers[j][0]).powi(2) + (x[1] - centers[j][1]).powi(2);
        let s2 = (2.0 * params[j]).exp();
        out += params[N_UNITS + j] * (-r2 / (2.0 * s2)).exp();
    }
    out
}

/// Mean squared distance to the center over `batch`.
pub fn loss(
    centers: &[[f64; 2]; N_UNITS],
    params: &[f64; N_PARAMS],
    batch: ArrayView2<'_, f64>,
) -> f64 {
    let c = params[IDX_CENTER];
    batch
        .rows()
        .into_iter()
        .map(|x| (net_output(centers, params, x) - c).powi(2))
        .sum::<f64>()
        / batch.nrows() as f64
}

/// Loss and its analytic gradient with respect to all parameters.
pub fn loss_and_grad(
    centers: &[[f64; 2]; N_UNITS],
    params: &[f64; N_PARAMS],
    batch: ArrayView2<'_, f64>,
) -> (f64, [f64; N_PARAMS]) {
    let n = batch.nrows() as f64;
    let c = params[IDX_CENTER];
    let mut grad = [0.0; N_PARAMS];
    let mut total = 0.0;
    for x in batch.rows() {
        let mut phi = [0.0; N_UNITS];
        let mut r2_over_s2 = [0.0; N_UNITS];
        let mut out = params[IDX_BIAS];
        for j in 0..N_UNITS {
            let r2 = (x[0] - centers[j][0]).powi(2) + (x[1] - centers[j][1]).powi(2);
            let s2 = (2.0 * params[j]).exp();
            phi[j] = (-r2 / (2.0 * s2)).exp();
            r2_over_s2[j] = r2 / s2;
            out += params[N_UNITS + j] * phi[j];
        }
        let resid = out - c;
        total += resid * resid;
        let g = 2.0 * resid / n;
        for j in 0..N_UNITS {
            // d phi / d u = phi * r^2 / s^2
            grad[j] += g * params[N_UNITS + j] * phi[j] * r2_over_s2[j];
            grad[N_UNITS + j] += g * phi[j];
        }
        grad[IDX_BIAS] += g;
        grad[IDX_CENTER] -= g;
    }
    (total / n, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfSvddModel {
    centers: [[f64; 2]; N_UNITS],
    params: [f64; N_PARAMS],
    loss_history: Vec<f64>,
}

impl RbfSvddModel {
    /// Random initialization: unit scales, standard-normal weights and
    /// center, zero bias.
    pub fn initialize(centers: [[f64; 2]; N_UNITS], seed: &SeedStream) -> Self {
        let mut rng = seed.named("init").rng();
        let mut params = [0.0; N_PARAMS];
        for j in 0..N_UNITS {
            params[N_UNITS + j] = StandardNormal.sample(&mut rng);
        }
        params[IDX_CENTER] = StandardNormal.sample(&mut rng);
        Self {
            centers,
            params,
            loss_history: Vec::new(),
        }
    }

    pub fn from_params(centers: [[f64; 2]; N_UNITS], params: [f64; N_PARAMS]) -> Self {
        Self {
            centers,
            params,
            loss_history: Vec::new(),
        }
    }

    pub fn fit(data: &TabularDataset, params: RbfSvddParams, seed: &SeedStream) -> Result<Self> {
        Self::fit_matrix(data.features(), params, seed)
    }

    pub fn fit_matrix(
        x: ArrayView2<'_, f64>,
        cfg: RbfSvddParams,
        seed: &SeedStream,
    ) -> Result<Self> {
        if x.ncols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: x.ncols(),
            });
        }
        if x.nrows() == 0 {
            return Err(Error::Data("cannot fit RBF SVDD on zero rows".into()));
        }
        if cfg.batch_size == 0 || !(cfg.lr > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "batch_size must be >= 1 and lr > 0 (got {}, {})",
                cfg.batch_size, cfg.lr
            )));
        }
        let mut model = Self::initialize(cfg.centers, seed);
        let mut adam = Adam::new(N_PARAMS, cfg.lr);
        let mut rng = seed.named("shuffle").rng();
        let mut order: Vec<usize> = (0..x.nrows()).collect();
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.batch_size) {
                let batch = x.select(ndarray::Axis(0), chunk);
                let (l, grad) = loss_and_grad(&model.centers, &model.params, batch.view());
                if !l.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    return Err(Error::Data(format!(
                        "non-finite training loss at epoch {}",
                        epoch + 1
                    )));
                }
                adam.step(&mut model.params, &grad);
            }
            model
                .loss_history
                .push(loss(&model.centers, &model.params, x));
        }
        Ok(model)
    }

    pub fn params(&self) -> &[f64; N_PARAMS] {
        &self.params
    }

    pub fn scales(&self) -> [f64; N_UNITS] {
        std::array::from_fn(|j| self.params[j].exp())
    }

    pub fn hypersphere_center(&self) -> f64 {
        self.params[IDX_CENTER]
    }

    /// Full-data loss after each epoch.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn output(&self, x: ArrayView1<'_, f64>) -> f64 {
        net_output(&self.centers, &self.params, x)
    }

    pub fn to_debug_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}

impl ScoreModel for RbfSvddModel {
    fn n_features(&self) -> usize {
        2
    }

    fn score(&self, queries: ArrayView2<'_, f64>) -> Result<ScoreVector> {
        check_dims(2, queries)?;
        let c = self.hypersphere_center();
        let values = queries
            .rows()
            .into_iter()
            .map(|q| (self.output(q) - c).powi(2))
            .collect();
        ScoreVector::new(values, Orientation::AnomalyHigh, "rbf_svdd")
    }
}
