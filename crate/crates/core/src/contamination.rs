//! Contaminated training sets: the three-Gaussian toy generator, mixture
//! injection from a labeled test pool, and noisy synthetic anomalies.

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Label, TabularDataset};
use crate::error::{Error, Result};
use crate::rng::SeedStream;

/// Isotropic Gaussian `N(mean, variance * I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    components: Vec<GaussianComponent>,
    weights: Vec<f64>,
}

impl GaussianMixtureSpec {
    pub fn new(components: Vec<GaussianComponent>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        let dim = components[0].mean.len();
        if dim == 0 || components.iter().any(|c| c.mean.len() != dim) {
            return Err(Error::InvalidParameter(
                "component means must share one nonzero dimension".into(),
            ));
        }
        if components
            .iter()
            .any(|c| !(c.variance > 0.0 && c.variance.is_finite()))
        {
            return Err(Error::InvalidParameter(
                "component variances must be positive".into(),
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(Error::InvalidParameter(format!(
                "weights must be non-negative and sum to 1, got {weights:?}"
            )));
        }
        Ok(Self {
            components,
            weights,
        })
    }

    /// Single isotropic component.
    pub fn single(mean: Vec<f64>, variance: f64) -> Result<Self> {
        Self::new(vec![GaussianComponent { mean, variance }], vec![1.0])
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.components[0].mean.len()
    }

    /// Density at `x`.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        let d = self.dim() as f64;
        self.components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| {
                let r2: f64 = c.mean.iter().zip(x).map(|(m, v)| (v - m).powi(2)).sum();
                w * (-r2 / (2.0 * c.variance)).exp()
                    / (2.0 * std::f64::consts::PI * c.variance).powf(d / 2.0)
            })
            .sum()
    }

    /// `n` draws as rows of an `n x dim` matrix.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Array2<f64> {
        let d = self.dim();
        let mut out = Array2::zeros((n, d));
        let picker = WeightedIndex::new(&self.weights).expect("validated weights");
        for mut row in out.rows_mut() {
            let c = &self.components[picker.sample(rng)];
            let sd = c.variance.sqrt();
            for (j, v) in row.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(rng);
                *v = c.mean[j] + sd * z;
            }
        }
        out
    }
}

/// Normal and anomalous generators for the two-dimensional toy problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    pub normal: GaussianMixtureSpec,
    pub anomalous: GaussianMixtureSpec,
}

impl Default for ToySpec {
    fn default() -> Self {
        let comp = |mean: [f64; 2], variance| GaussianComponent {
            mean: mean.to_vec(),
            variance,
        };
        Self {
            normal: GaussianMixtureSpec {
                components: vec![comp([1.0, 1.0], 0.07)],
                weights: vec![1.0],
            },
            anomalous: GaussianMixtureSpec {
                components: vec![comp([-0.25, 2.5], 0.03), comp([-1.0, 0.5], 0.03)],
                weights: vec![0.5, 0.5],
            },
        }
    }
}

/// Labeled toy sample: `n_normal` normal rows followed by `n_anomalous`
/// anomalous rows. Normal and anomalous draws use separate sub-streams, so
/// growing one count leaves the other's prefix unchanged.
pub fn sample_toy(
    spec: &ToySpec,
    n_normal: usize,
    n_anomalous: usize,
    seed: &SeedStream,
) -> Result<TabularDataset> {
    let normal = spec
        .normal
        .sample(n_normal, &mut seed.named("normal").rng());
    let anomalous = spec
        .anomalous
        .sample(n_anomalous, &mut seed.named("anomalous").rng());
    let features = ndarray::concatenate(ndarray::Axis(0), &[normal.view(), anomalous.view()])
        .map_err(|e| Error::Data(e.to_string()))?;
    let labels = std::iter::repeat_n(Label::Normal, n_normal)
        .chain(std::iter::repeat_n(Label::Anomalous, n_anomalous))
        .collect();
    TabularDataset::new("toy2d", features, Some(labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Injected anomalies are drawn from the test set and stay there.
    Overlap,
    /// Injected anomalies are drawn from the test set and removed from it.
    NonOverlap,
    /// Injected anomalies are noisy copies of test anomalies; test unchanged.
    SyntheticNoise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub epsilon: f64,
    pub protocol: Protocol,
    /// Per-feature noise standard deviation (synthetic protocol only). A
    /// single value is broadcast to every feature.
    pub noise_sigma: Vec<f64>,
}

impl ContaminationSpec {
    /// Noise scale is checked later, once set (see [`Self::with_noise_sigma`]).
    pub fn new(epsilon: f64, protocol: Protocol) -> Result<Self> {
        validate_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            protocol,
            noise_sigma: Vec::new(),
        })
    }

    #[must_use]
    pub fn with_noise_sigma(mut self, sigma: Vec<f64>) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_epsilon(self.epsilon)?;
        if self.protocol == Protocol::SyntheticNoise
            && (self.noise_sigma.is_empty()
                || self
                    .noise_sigma
                    .iter()
                    .any(|s| !(*s > 0.0 && s.is_finite())))
        {
            return Err(Error::InvalidParameter(
                "synthetic-noise protocol needs positive noise_sigma".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn validate_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// Anomalies needed next to `m` normals for contamination `epsilon`:
/// `eps * m / (1 - eps)` rounded half up.
pub fn anomaly_count(m: usize, epsilon: f64) -> Result<usize> {
    validate_epsilon(epsilon)?;
    let exact = epsilon * m as f64 / (1.0 - epsilon);
    // the slack absorbs representation error on exact halves
    Ok((exact + 0.5 + 1e-9).floor() as usize)
}

/// A training set whose labels are hidden from detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ContaminatedTrain {
    train: TabularDataset,
    audit: Vec<Label>,
    injected_test_rows: Vec<usize>,
}

impl ContaminatedTrain {
    /// Unlabeled view used for fitting.
    pub fn train(&self) -> &TabularDataset {
        &self.train
    }

    /// Ground-truth labels of the training rows; intended for checks only.
    pub fn audit_labels(&self) -> &[Label] {
        &self.audit
    }

    /// Test-set rows whose values were injected (with repeats for the
    /// synthetic protocol).
    pub fn injected_test_rows(&self) -> &[usize] {
        &self.injected_test_rows
    }

    pub fn n_anomalous(&self) -> usize {
        self.audit.iter().filter(|l| l.is_anomalous()).count()
    }

    /// Fraction of anomalous rows actually present.
    pub fn realized_epsilon(&self) -> f64 {
        self.n_anomalous() as f64 / self.audit.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contamination {
    pub train: ContaminatedTrain,
    pub test_adjusted: TabularDataset,
}

/// Mix anomalies from the labeled `test` pool into `normals` at rate
/// `spec.epsilon`.
pub fn contaminate_train(
    normals: &TabularDataset,
    test: &TabularDataset,
    spec: &ContaminationSpec,
    seed: &SeedStream,
) -> Result<Contamination> {
    spec.validate()?;
    if normals.n_features() != test.n_features() {
        return Err(Error::DimensionMismatch {
            expected: normals.n_features(),
            got: test.n_features(),
        });
    }
    let m = normals.n_samples();
    let a = anomaly_count(m, spec.epsilon)?;
    let pool = test.indices_with(Label::Anomalous);
    test.require_labels()?;

    let mut rng = seed.named("inject").rng();
    let (injected_rows, injected) = match spec.protocol {
        Protocol::Overlap | Protocol::NonOverlap => {
            if a > pool.len() {
                return Err(Error::Data(format!(
                    "epsilon {} needs {a} anomalies but the test set holds {}",
                    spec.epsilon,
                    pool.len()
                )));
            }
            let mut rows: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), a)
                .into_iter()
                .map(|i| pool[i])
                .collect();
            rows.sort_unstable();
            let data = if a > 0 {
                Some(test.select(&rows)?)
            } else {
                None
            };
            (rows, data)
        }
        Protocol::SyntheticNoise => {
            if a > 0 && pool.is_empty() {
                return Err(Error::Data(
                    "no test anomalies to build synthetic anomalies from".into(),
                ));
            }
            let rows: Vec<usize> = (0..a)
                .map(|_| pool[rng.random_range(0..pool.len())])
                .collect();
            let data = if a > 0 {
                let sigma = broadcast(&spec.noise_sigma, test.n_features())?;
                Some(add_noise(
                    &test.select(&rows)?,
                    &sigma,
                    &seed.named("noise"),
                )?)
            } else {
                None
            };
            (rows, data)
        }
    };

    let normals = TabularDataset::new(
        normals.name(),
        normals.features().to_owned(),
        Some(vec![Label::Normal; m]),
    )?;
    let train = match injected {
        Some(anom) => normals.concat(&TabularDataset::new(
            normals.name(),
            anom.features().to_owned(),
            Some(vec![Label::Anomalous; a]),
        )?)?,
        None => normals,
    };
    let audit = train.require_labels()?.to_vec();

    let test_adjusted = if spec.protocol == Protocol::NonOverlap && a > 0 {
        let keep: Vec<usize> = (0..test.n_samples())
            .filter(|i| injected_rows.binary_search(i).is_err())
            .collect();
        test.select(&keep)?
    } else {
        test.clone()
    };

    Ok(Contamination {
        train: ContaminatedTrain {
            train: train.unlabeled(),
            audit,
            injected_test_rows: injected_rows,
        },
        test_adjusted,
    })
}

fn broadcast(sigma: &[f64], d: usize) -> Result<Vec<f64>> {
    match sigma.len() {
        1 => Ok(vec![sigma[0]; d]),
        n if n == d => Ok(sigma.to_vec()),
        n => Err(Error::DimensionMismatch {
            expected: d,
            got: n,
        }),
    }
}

fn add_noise(source: &TabularDataset, sigma: &[f64], seed: &SeedStream) -> Result<TabularDataset> {
    let mut rng = seed.rng();
    let mut x = source.features().to_owned();
    for mut row in x.rows_mut() {
        for (v, s) in row.iter_mut().zip(sigma) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += s * z;
        }
    }
    TabularDataset::new(
        source.name(),
        x,
        Some(vec![Label::Anomalous; source.n_samples()]),
    )
}

/// `n` anomalies: rows of `test_anomalies` drawn with replacement, plus
/// i.i.d. `N(0, sigma_j^2)` noise on feature `j`.
pub fn synthetic_anomalies(
    test_anomalies: &TabularDataset,
    sigma: &[f64],
    n: usize,
    seed: &SeedStream,
) -> Result<TabularDataset> {
    let sigma = broadcast(sigma, test_anomalies.n_features())?;
    if sigma.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidParameter(
            "noise sigma must be positive".into(),
        ));
    }
    let mut rng = seed.named("pick").rng();
    let rows: Vec<usize> = (0..n)
        .map(|_| rng.random_range(0..test_anomalies.n_samples()))
        .collect();
    add_noise(&test_anomalies.select(&rows)?, &sigma, &seed.named("noise"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(n_norm: usize, n_anom: usize) -> TabularDataset {
        sample_toy(&ToySpec::default(), n_norm, n_anom, &SeedStream::new(99)).unwrap()
    }

    #[test]
    fn toy_labels_and_shape() {
        let ds = sample_toy(&ToySpec::default(), 90, 10, &SeedStream::new(1)).unwrap();
        assert_eq!(ds.n_samples(), 100);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(
            ds.indices_with(Label::Anomalous),
            (90..100).collect::<Vec<_>>()
        );
        let clean = sample_toy(&ToySpec::default(), 20, 0, &SeedStream::new(1)).unwrap();
        assert!(clean.labels().unwrap().iter().all(|l| *l == Label::Normal));
        assert_eq!(
            clean,
            sample_toy(&ToySpec::default(), 20, 0, &SeedStream::new(1)).unwrap()
        );
    }

    #[test]
    fn toy_normal_mean_is_close() {
        let ds = sample_toy(&ToySpec::default(), 100_000, 0, &SeedStream::new(4)).unwrap();
        let mean = ds.features().mean_axis(ndarray::Axis(0)).unwrap();
        assert!(
            (mean[0] - 1.0).abs() < 0.01 && (mean[1] - 1.0).abs() < 0.01,
            "{mean}"
        );
        let var = ds.features().var_axis(ndarray::Axis(0), 1.0);
        assert!((var[0] - 0.07).abs() < 0.07 * 0.02);
    }

    #[test]
    fn toy_anomalies_split_between_components() {
        let ds = sample_toy(&ToySpec::default(), 0, 10_000, &SeedStream::new(5)).unwrap();
        let upper = ds
            .features()
            .rows()
            .into_iter()
            .filter(|r| r[1] > 1.5)
            .count();
        assert!((4700..5300).contains(&upper), "{upper}");
    }

    #[test]
    fn mixture_validation() {
        let c = GaussianComponent {
            mean: vec![0.0],
            variance: 1.0,
        };
        assert!(GaussianMixtureSpec::new(vec![c.clone()], vec![0.9]).is_err());
        assert!(GaussianMixtureSpec::new(vec![c.clone()], vec![1.0, 0.0]).is_err());
        let bad = GaussianComponent {
            mean: vec![0.0],
            variance: 0.0,
        };
        assert!(GaussianMixtureSpec::new(vec![bad], vec![1.0]).is_err());
        let g = GaussianMixtureSpec::single(vec![0.0], 1.0).unwrap();
        assert!((g.pdf(&[0.0]) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn anomaly_count_rounding() {
        assert_eq!(anomaly_count(90, 0.1).unwrap(), 10);
        assert_eq!(anomaly_count(90, 0.0).unwrap(), 0);
        // 0.2 * 10 / 0.8 = 2.5 rounds up
        assert_eq!(anomaly_count(10, 0.2).unwrap(), 3);
        assert_eq!(anomaly_count(59, 0.1).unwrap(), 7);
        assert!(anomaly_count(10, 1.0).is_err());
        assert!(anomaly_count(10, -0.1).is_err());
    }

    #[test]
    fn zero_epsilon_keeps_everything() {
        let normals = pool(30, 0).unlabeled();
        let test = pool(40, 8);
        let spec = ContaminationSpec::new(0.0, Protocol::NonOverlap).unwrap();
        let c = contaminate_train(&normals, &test, &spec, &SeedStream::new(0)).unwrap();
        assert_eq!(c.train.train().features(), normals.features());
        assert_eq!(c.test_adjusted, test);
        assert_eq!(c.train.realized_epsilon(), 0.0);
    }

    #[test]
    fn overlap_and_non_overlap_share_train() {
        let normals = pool(90, 0).unlabeled();
        let test = pool(50, 20);
        let seed = SeedStream::new(3);
        let over = contaminate_train(
            &normals,
            &test,
            &ContaminationSpec::new(0.1, Protocol::Overlap).unwrap(),
            &seed,
        )
        .unwrap();
        let non = contaminate_train(
            &normals,
            &test,
            &ContaminationSpec::new(0.1, Protocol::NonOverlap).unwrap(),
            &seed,
        )
        .unwrap();
        assert_eq!(over.train, non.train);
        assert_eq!(over.train.n_anomalous(), 10);
        assert!((over.train.realized_epsilon() - 0.1).abs() <= 1.0 / 100.0);
        assert!(over.train.train().labels().is_none());
        assert_eq!(over.test_adjusted, test);
        assert_eq!(non.test_adjusted.n_samples(), test.n_samples() - 10);
        // the removed rows are exactly the injected ones
        let injected = non.train.injected_test_rows();
        let kept: Vec<usize> = (0..test.n_samples())
            .filter(|i| !injected.contains(i))
            .collect();
        assert_eq!(non.test_adjusted, test.select(&kept).unwrap());
        for &r in injected {
            assert_eq!(test.labels().unwrap()[r], Label::Anomalous);
        }
    }

    #[test]
    fn insufficient_anomalies() {
        let normals = pool(90, 0).unlabeled();
        let test = pool(50, 5);
        let spec = ContaminationSpec::new(0.1, Protocol::Overlap).unwrap();
        assert!(matches!(
            contaminate_train(&normals, &test, &spec, &SeedStream::new(0)),
            Err(Error::Data(_))
        ));
        assert!(ContaminationSpec::new(1.0, Protocol::Overlap).is_err());
        assert!(ContaminationSpec::new(0.1, Protocol::SyntheticNoise)
            .unwrap()
            .validate()
            .is_err());
    }

    #[test]
    fn synthetic_protocol_leaves_test_alone() {
        let normals = pool(59, 0).unlabeled();
        let test = pool(60, 2);
        let spec = ContaminationSpec::new(0.1, Protocol::SyntheticNoise)
            .unwrap()
            .with_noise_sigma(vec![0.5]);
        let c = contaminate_train(&normals, &test, &spec, &SeedStream::new(2)).unwrap();
        assert_eq!(c.train.n_anomalous(), 7);
        assert_eq!(c.test_adjusted, test);
        assert_eq!(c.train.train().n_samples(), 66);
    }

    #[test]
    fn tiny_sigma_reproduces_sources() {
        let anoms = pool(0, 6);
        let out = synthetic_anomalies(&anoms, &[1e-12], 50, &SeedStream::new(8)).unwrap();
        for row in out.features().rows() {
            let close = anoms.features().rows().into_iter().any(|src| {
                src.iter()
                    .zip(row.iter())
                    .all(|(a, b)| (a - b).abs() < 1e-9)
            });
            assert!(close);
        }
        assert!(out.labels().unwrap().iter().all(|l| l.is_anomalous()));
    }

    #[test]
    fn noise_variance_matches_sigma() {
        let one = TabularDataset::from_rows("src", &[vec![2.0, -1.0]], None).unwrap();
        let out = synthetic_anomalies(&one, &[0.5, 2.0], 100_000, &SeedStream::new(9)).unwrap();
        let var = out.features().var_axis(ndarray::Axis(0), 1.0);
        assert!((var[0] / 0.25 - 1.0).abs() < 0.02, "{var}");
        assert!((var[1] / 4.0 - 1.0).abs() < 0.02, "{var}");
        let again = synthetic_anomalies(&one, &[0.5, 2.0], 100_000, &SeedStream::new(9)).unwrap();
        assert_eq!(out, again);
        assert!(synthetic_anomalies(&one, &[0.5, 2.0, 1.0], 3, &SeedStream::new(9)).is_err());
        assert!(synthetic_anomalies(&one, &[0.0], 3, &SeedStream::new(9)).is_err());
    }
}
