//! Post-hoc adjustment of anomaly scores with test-time evidence.
//!
//! A base detector trained on possibly contaminated data produces a score per
//! test sample. An evidence function, computed on the test batch itself or
//! supplied externally, produces a second score. The two are combined by
//! exponential tilting, which for scores reduces to
//! `norm(base_inlier) + norm(evidence) / beta`.
//!
//! Modules:
//! - [`data`]: datasets, score vectors, CSV readers
//! - [`detectors`]: LOF, Isolation Forest, k-NN distance, RBF one-class model
//! - [`fusion`], [`calibration`]: fixed and adaptive temperature fusion
//! - [`density`]: tilting on discrete densities
//! - [`contamination`]: contaminated training sets
//! - [`eval`]: AUROC, rank correlations, seed aggregation
//! - [`experiment`]: config-driven pipelines and report files

// `!(x > 0.0)` guards are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod contamination;
pub mod data;
pub mod density;
pub mod detectors;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod fusion;
pub mod rng;

pub use data::{Label, Normalization, Orientation, ScoreVector, TabularDataset};
pub use error::{Error, Result};
pub use rng::SeedStream;
