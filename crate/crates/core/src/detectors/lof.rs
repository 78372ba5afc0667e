//! Local Outlier Factor with exact Euclidean neighborhoods.
//!
//! Neighborhoods keep every point tied at the k-distance, so `|N_k|` can exceed
//! `k`. Reachability distances are floored at [`MIN_REACH_DIST`] to keep the
//! local reachability density finite on duplicated points.

use ndarray::{Array2, ArrayView1, ArrayView2};

use super::{check_dims, euclidean, ScoreModel};
use crate::data::{Orientation, ScoreVector, TabularDataset};
use crate::error::{Error, Result};

pub const MIN_REACH_DIST: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LofModel {
    reference: Array2<f64>,
    k: usize,
    k_distance: Vec<f64>,
    lrd: Vec<f64>,
}

/// Neighborhood of one point: `(reference index, distance)` for every
/// reference point within the k-distance, plus the k-distance itself.
struct Neighborhood {
    members: Vec<(usize, f64)>,
    k_distance: f64,
}

fn neighborhood(dists: &[(usize, f64)], k: usize) -> Neighborhood {
    let mut sorted: Vec<f64> = dists.iter().map(|(_, d)| *d).collect();
    sorted.sort_by(f64::total_cmp);
    let k_distance = sorted[k - 1];
    let members = dists
        .iter()
        .copied()
        .filter(|(_, d)| *d <= k_distance)
        .collect();
    Neighborhood {
        members,
        k_distance,
    }
}

impl LofModel {
    pub fn fit(data: &TabularDataset, k: usize) -> Result<Self> {
        Self::fit_matrix(data.features(), k)
    }

    pub fn fit_matrix(reference: ArrayView2<'_, f64>, k: usize) -> Result<Self> {
        let m = reference.nrows();
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "LOF needs at least 2 points, got {m}"
            )));
        }
        if k == 0 || k >= m {
            return Err(Error::InvalidParameter(format!(
                "LOF needs 1 <= k < n, got k={k}, n={m}"
            )));
        }
        if reference.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(
                "LOF reference contains non-finite values".into(),
            ));
        }

        let hoods: Vec<Neighborhood> = (0..m)
            .map(|i| {
                let dists: Vec<(usize, f64)> = (0..m)
                    .filter(|&j| j != i)
                    .map(|j| (j, euclidean(reference.row(i), reference.row(j))))
                    .collect();
                neighborhood(&dists, k)
            })
            .collect();
        let k_distance: Vec<f64> = hoods.iter().map(|h| h.k_distance).collect();
        let lrd = hoods
            .iter()
            .map(|h| local_reachability(h, &k_distance))
            .collect();

        Ok(Self {
            reference: reference.to_owned(),
            k,
            k_distance,
            lrd,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lrd(&self) -> &[f64] {
        &self.lrd
    }

    pub fn k_distance(&self) -> &[f64] {
        &self.k_distance
    }

    fn score_one(&self, q: ArrayView1<'_, f64>) -> f64 {
        let mut dists: Vec<(usize, f64)> = (0..self.reference.nrows())
            .map(|j| (j, euclidean(q, self.reference.row(j))))
            .collect();
        // A query sitting exactly on a reference point is that point: drop it
        // from its own neighborhood so scoring the reference set reproduces
        // the classical in-sample LOF.
        if let Some(pos) = dists.iter().position(|(_, d)| *d == 0.0) {
            dists.remove(pos);
        }
        let hood = neighborhood(&dists, self.k);
        let lrd_q = local_reachability(&hood, &self.k_distance);
        let ratio_sum: f64 = hood.members.iter().map(|(j, _)| self.lrd[*j] / lrd_q).sum();
        ratio_sum / hood.members.len() as f64
    }
}

fn local_reachability(hood: &Neighborhood, k_distance: &[f64]) -> f64 {
    let total: f64 = hood
        .members
        .iter()
        .map(|(j, d)| d.max(k_distance[*j]).max(MIN_REACH_DIST))
        .sum();
    hood.members.len() as f64 / total
}

impl ScoreModel for LofModel {
    fn n_features(&self) -> usize {
        self.reference.ncols()
    }

    fn score(&self, queries: ArrayView2<'_, f64>) -> Result<ScoreVector> {
        check_dims(self.reference.ncols(), queries)?;
        let values = queries
            .rows()
            .into_iter()
            .map(|q| self.score_one(q))
            .collect();
        ScoreVector::new(values, Orientation::AnomalyHigh, "lof")
    }
}

/// Fit on `data` and score the same rows (transductive evidence).
pub fn lof_transductive(data: ArrayView2<'_, f64>, k: usize) -> Result<ScoreVector> {
    LofModel::fit_matrix(data, k)?.score(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use ndarray::array;
    use rand::Rng;

    /// Straight double-loop LOF over a point set, written without any of the
    /// helpers above. Neighbors of i exclude i itself; reach-dist of i from
    /// o is max(k-distance(o), d(i, o)).
    fn brute_force_lof(pts: &[Vec<f64>], k: usize) -> Vec<f64> {
        let n = pts.len();
        let d = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            for t in 0..a.len() {
                s += (a[t] - b[t]) * (a[t] - b[t]);
            }
            s.sqrt()
        };
        let mut kd = vec![0.0; n];
        let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let mut ds = Vec::new();
            for j in 0..n {
                if j != i {
                    ds.push(d(&pts[i], &pts[j]));
                }
            }
            ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
            kd[i] = ds[k - 1];
            for j in 0..n {
                if j != i && d(&pts[i], &pts[j]) <= kd[i] {
                    nbrs[i].push(j);
                }
            }
        }
        let mut lrd = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for &o in &nbrs[i] {
                let r = if kd[o] > d(&pts[i], &pts[o]) {
                    kd[o]
                } else {
                    d(&pts[i], &pts[o])
                };
                s += r;
            }
            lrd[i] = 1.0 / (s / nbrs[i].len() as f64);
        }
        let mut lof = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for &o in &nbrs[i] {
                s += lrd[o] / lrd[i];
            }
            lof[i] = s / nbrs[i].len() as f64;
        }
        lof
    }

    fn to_matrix(pts: &[Vec<f64>]) -> Array2<f64> {
        let d = pts[0].len();
        Array2::from_shape_vec((pts.len(), d), pts.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn unit_square_is_symmetric() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let s = lof_transductive(x.view(), 2).unwrap();
        for v in s.values() {
            assert!((v - s.values()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn equilateral_triangle_reference_point_scores_one() {
        let h = 3f64.sqrt() / 2.0;
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.5, h]];
        let model = LofModel::fit_matrix(x.view(), 2).unwrap();
        let s = model.score(array![[1.0, 0.0]].view()).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-12, "{}", s.values()[0]);
    }

    #[test]
    fn far_point_has_largest_lof() {
        let mut rng = SeedStream::new(11).rng();
        let mut pts: Vec<Vec<f64>> = (0..10)
            .map(|_| vec![rng.random::<f64>() * 0.1, rng.random::<f64>() * 0.1])
            .collect();
        pts.push(vec![5.0, 5.0]);
        let s = lof_transductive(to_matrix(&pts).view(), 3).unwrap();
        let oracle = brute_force_lof(&pts, 3);
        let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
        assert_eq!(argmax(s.values()), 10);
        assert_eq!(argmax(&oracle), 10);
        for (a, b) in s.values().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn k_bounds_are_checked() {
        let x = array![[0.0], [1.0], [2.0]];
        assert!(LofModel::fit_matrix(x.view(), 3).is_err());
        assert!(LofModel::fit_matrix(x.view(), 0).is_err());
        assert!(LofModel::fit_matrix(array![[0.0]].view(), 1).is_err());
        let m = LofModel::fit_matrix(x.view(), 2).unwrap();
        assert!(matches!(
            m.score(array![[0.0, 1.0]].view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matches_brute_force_on_random_sets() {
        let root = SeedStream::new(5);
        for case in 0..20 {
            let mut rng = root.child(case).rng();
            let n = rng.random_range(5..=50);
            let d = rng.random_range(1..=4);
            let k = rng.random_range(1..n.min(12));
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.random::<f64>() * 10.0).collect())
                .collect();
            let got = lof_transductive(to_matrix(&pts).view(), k).unwrap();
            let want = brute_force_lof(&pts, k);
            for (a, b) in got.values().iter().zip(&want) {
                assert!((a - b).abs() < 1e-9, "case {case}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ties_enlarge_the_neighborhood() {
        // Points on a line at -1, 0, 1: for the middle point with k=1, both
        // neighbors are tied at distance 1.
        let x = array![[-1.0], [0.0], [1.0], [10.0]];
        let pts: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
        let got = lof_transductive(x.view(), 1).unwrap();
        let want = brute_force_lof(&pts, 1);
        for (a, b) in got.values().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicates_stay_finite() {
        let x = array![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 1.0]];
        let s = lof_transductive(x.view(), 2).unwrap();
        assert!(s.values().iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn translation_invariant() {
        let mut rng = SeedStream::new(9).rng();
        let x = Array2::from_shape_fn((30, 3), |_| rng.random::<f64>());
        let q = Array2::from_shape_fn((10, 3), |_| rng.random::<f64>() * 2.0);
        let shift = ndarray::arr1(&[3.5, -7.25, 100.0]);
        let a = LofModel::fit_matrix(x.view(), 5)
            .unwrap()
            .score(q.view())
            .unwrap();
        let b = LofModel::fit_matrix((&x + &shift).view(), 5)
            .unwrap()
            .score((&q + &shift).view())
            .unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert!((u - v).abs() < 1e-9 * u.max(1.0));
        }
    }
}
