//! Isolation Forest.
//!
//! Each tree is grown on a subsample of size `psi` down to depth
//! `ceil(log2 psi)`. The score of a point is `2^(-E[h(x)] / c(psi))` where
//! `h(x)` counts edges to the reached leaf plus `c(leaf size)` for leaves that
//! were cut short.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_dims, ScoreModel};
use crate::data::{Orientation, ScoreVector, TabularDataset};
use crate::error::{Error, Result};
use crate::rng::SeedStream;

const EULER_GAMMA: f64 = 0.577_215_664_9;

fn harmonic(i: f64) -> f64 {
    i.ln() + EULER_GAMMA
}

/// Average path length of an unsuccessful binary-search-tree lookup over `n`
/// keys: `c(n) = 2 H(n-1) - 2 (n-1) / n`, with `c(0) = c(1) = 0`.
pub fn average_path_length(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let n = n as f64;
    2.0 * harmonic(n - 1.0) - 2.0 * (n - 1.0) / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolationForestParams {
    pub tree_count: usize,
    pub subsample_size: usize,
}

impl Default for IsolationForestParams {
    fn default() -> Self {
        Self {
            tree_count: 100,
            subsample_size: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        size: usize,
    },
}

/// One isolation tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree {
    nodes: Vec<Node>,
}

impl IsolationTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn path_length(&self, x: ArrayView1<'_, f64>) -> f64 {
        let mut at = 0;
        let mut edges = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf { size } => return edges as f64 + average_path_length(size),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[feature] < threshold { left } else { right };
                    edges += 1;
                }
            }
        }
    }
}

struct TreeBuilder<'a, R: Rng> {
    data: ArrayView2<'a, f64>,
    max_depth: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> TreeBuilder<'_, R> {
    /// Pick a split on a feature that is non-constant over `rows`, or `None`
    /// when every feature is constant (duplicate node).
    fn choose_split(&mut self, rows: &[usize]) -> Option<(usize, f64)> {
        let d = self.data.ncols();
        let ranges: Vec<(usize, f64, f64)> = (0..d)
            .filter_map(|f| {
                let (lo, hi) =
                    rows.iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                            let v = self.data[[r, f]];
                            (lo.min(v), hi.max(v))
                        });
                // need at least one representable value strictly inside
                let mid = lo + (hi - lo) / 2.0;
                (lo < mid && mid < hi).then_some((f, lo, hi))
            })
            .collect();
        if ranges.is_empty() {
            return None;
        }
        let (feature, lo, hi) = ranges[self.rng.random_range(0..ranges.len())];
        loop {
            let t = lo + self.rng.random::<f64>() * (hi - lo);
            if lo < t && t < hi {
                return Some((feature, t));
            }
        }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { size: rows.len() });
        if rows.len() <= 1 || depth >= self.max_depth {
            return id;
        }
        let Some((feature, threshold)) = self.choose_split(&rows) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.data[[i, feature]] < threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationForest {
    trees: Vec<IsolationTree>,
    subsample_size: usize,
    max_depth: usize,
    n_features: usize,
}

impl IsolationForest {
    pub fn fit(
        data: &TabularDataset,
        params: IsolationForestParams,
        seed: &SeedStream,
    ) -> Result<Self> {
        Self::fit_matrix(data.features(), params, seed)
    }

    pub fn fit_matrix(
        data: ArrayView2<'_, f64>,
        params: IsolationForestParams,
        seed: &SeedStream,
    ) -> Result<Self> {
        let IsolationForestParams {
            tree_count,
            subsample_size,
        } = params;
        if tree_count == 0 {
            return Err(Error::InvalidParameter("tree_count must be >= 1".into()));
        }
        if subsample_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "subsample_size must be >= 2, got {subsample_size}"
            )));
        }
        let n = data.nrows();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "isolation forest needs at least 2 rows, got {n}"
            )));
        }
        let max_depth = (subsample_size as f64).log2().ceil() as usize;
        let trees = (0..tree_count)
            .map(|t| {
                let mut rng = seed.child(t as u64).rng();
                let rows: Vec<usize> = if n >= subsample_size {
                    sample(&mut rng, n, subsample_size).into_vec()
                } else {
                    (0..subsample_size)
                        .map(|_| rng.random_range(0..n))
                        .collect()
                };
                let mut builder = TreeBuilder {
                    data,
                    max_depth,
                    rng: &mut rng,
                    nodes: Vec::new(),
                };
                builder.grow(rows, 0);
                IsolationTree {
                    nodes: builder.nodes,
                }
            })
            .collect();
        Ok(Self {
            trees,
            subsample_size,
            max_depth,
            n_features: data.ncols(),
        })
    }

    pub fn trees(&self) -> &[IsolationTree] {
        &self.trees
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn expected_path_length(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.trees.iter().map(|t| t.path_length(x)).sum::<f64>() / self.trees.len() as f64
    }

    /// Debug dump of the fitted trees. Not a stable format.
    pub fn to_debug_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}

impl ScoreModel for IsolationForest {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn score(&self, queries: ArrayView2<'_, f64>) -> Result<ScoreVector> {
        check_dims(self.n_features, queries)?;
        let c = average_path_length(self.subsample_size);
        let values = queries
            .rows()
            .into_iter()
            .map(|q| 2f64.powf(-self.expected_path_length(q) / c))
            .collect();
        ScoreVector::new(values, Orientation::AnomalyHigh, "iforest")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn c_of_small_n() {
        assert_eq!(average_path_length(1), 0.0);
        // 2 (ln 1 + gamma) - 2 * 1/2
        let c2 = 2.0 * 0.577_215_664_9 - 1.0;
        assert!((average_path_length(2) - c2).abs() < 1e-15);
        assert!((average_path_length(2) - 0.1544).abs() < 1e-4);
        // 2 (ln 255 + gamma) - 2 * 255/256
        let c256 = 2.0 * (255f64.ln() + 0.577_215_664_9) - 2.0 * 255.0 / 256.0;
        assert!((average_path_length(256) - c256).abs() < 1e-12);
    }

    #[test]
    fn psi_two_gives_shallow_trees() {
        let x = Array2::from_shape_fn((50, 2), |(i, j)| (i * 7 + j * 3) as f64 % 11.0);
        let f = IsolationForest::fit_matrix(
            x.view(),
            IsolationForestParams {
                tree_count: 30,
                subsample_size: 2,
            },
            &SeedStream::new(1),
        )
        .unwrap();
        assert_eq!(f.max_depth(), 1);
        assert!(f.trees().iter().all(|t| t.depth() <= 1));
    }

    #[test]
    fn duplicate_subsample_scores_one_half() {
        let x = array![[1.0, 2.0], [1.0, 2.0], [1.0, 2.0], [1.0, 2.0]];
        let f = IsolationForest::fit_matrix(
            x.view(),
            IsolationForestParams {
                tree_count: 1,
                subsample_size: 4,
            },
            &SeedStream::new(0),
        )
        .unwrap();
        assert_eq!(f.trees()[0].depth(), 0);
        let s = f.score(array![[1.0, 2.0], [50.0, -3.0]].view()).unwrap();
        for v in s.values() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let mut rng = SeedStream::new(3).rng();
        let x = Array2::from_shape_fn((120, 3), |_| StandardNormal.sample(&mut rng));
        let p = IsolationForestParams {
            tree_count: 20,
            subsample_size: 64,
        };
        let a = IsolationForest::fit_matrix(x.view(), p, &SeedStream::new(8)).unwrap();
        let b = IsolationForest::fit_matrix(x.view(), p, &SeedStream::new(8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.score(x.view()).unwrap(), b.score(x.view()).unwrap());
        let c = IsolationForest::fit_matrix(x.view(), p, &SeedStream::new(9)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn structure_invariants_hold() {
        let mut rng = SeedStream::new(4).rng();
        let x: Array2<f64> = Array2::from_shape_fn((300, 4), |_| StandardNormal.sample(&mut rng));
        let p = IsolationForestParams {
            tree_count: 25,
            subsample_size: 100,
        };
        let f = IsolationForest::fit_matrix(x.view(), p, &SeedStream::new(2)).unwrap();
        assert_eq!(f.max_depth(), 7);
        for t in f.trees() {
            assert!(t.depth() <= 7);
            let total: usize = t
                .nodes()
                .iter()
                .map(|n| match n {
                    Node::Leaf { size } => *size,
                    Node::Split { .. } => 0,
                })
                .sum();
            assert_eq!(total, 100);
        }
        let s = f.score(x.view()).unwrap();
        assert!(s.values().iter().all(|v| *v > 0.0 && *v < 1.0));
    }

    #[test]
    fn small_n_samples_with_replacement() {
        let x = array![[0.0], [1.0], [2.0]];
        let f = IsolationForest::fit_matrix(
            x.view(),
            IsolationForestParams {
                tree_count: 5,
                subsample_size: 8,
            },
            &SeedStream::new(0),
        )
        .unwrap();
        for t in f.trees() {
            let total: usize = t
                .nodes()
                .iter()
                .map(|n| {
                    if let Node::Leaf { size } = n {
                        *size
                    } else {
                        0
                    }
                })
                .sum();
            assert_eq!(total, 8);
        }
    }

    #[test]
    fn parameter_errors() {
        let x = array![[0.0], [1.0]];
        let bad_psi = IsolationForestParams {
            tree_count: 1,
            subsample_size: 1,
        };
        let bad_trees = IsolationForestParams {
            tree_count: 0,
            subsample_size: 2,
        };
        assert!(IsolationForest::fit_matrix(x.view(), bad_psi, &SeedStream::new(0)).is_err());
        assert!(IsolationForest::fit_matrix(x.view(), bad_trees, &SeedStream::new(0)).is_err());
        let ok = IsolationForest::fit_matrix(
            x.view(),
            IsolationForestParams::default(),
            &SeedStream::new(0),
        )
        .unwrap();
        assert!(ok.score(array![[0.0, 1.0]].view()).is_err());
    }

    #[test]
    fn score_is_monotone_in_path_length() {
        let mut rng = SeedStream::new(12).rng();
        let x: Array2<f64> = Array2::from_shape_fn((200, 2), |_| StandardNormal.sample(&mut rng));
        let f = IsolationForest::fit_matrix(
            x.view(),
            IsolationForestParams::default(),
            &SeedStream::new(1),
        )
        .unwrap();
        let q: Array2<f64> = Array2::from_shape_fn((40, 2), |_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            3.0 * z
        });
        let s = f.score(q.view()).unwrap();
        let h: Vec<f64> = q
            .rows()
            .into_iter()
            .map(|r| f.expected_path_length(r))
            .collect();
        for i in 0..h.len() {
            for j in 0..h.len() {
                if h[i] > h[j] {
                    assert!(s.values()[i] < s.values()[j]);
                }
            }
        }
    }

    #[test]
    fn debug_dump_is_json() {
        let x = array![[0.0], [1.0], [5.0]];
        let f = IsolationForest::fit_matrix(
            x.view(),
            IsolationForestParams {
                tree_count: 2,
                subsample_size: 3,
            },
            &SeedStream::new(0),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&f.to_debug_json()).unwrap();
        assert_eq!(v["trees"].as_array().unwrap().len(), 2);
    }
}
