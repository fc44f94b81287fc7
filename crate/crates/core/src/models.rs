//! Gaussian mean-measurement benchmark: `m_n = θ + ξ_n`, `ξ_n ~ N(μ_ξ, Σ_ξ)`.
//!
//! Also holds the ground truth used to score runs: the conjugate Gaussian
//! posterior and quadrature / closed-form evidence oracles.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::{write_csv, write_json, Cell};
use crate::priors::{PriorKind, PriorSpec};
use crate::quadrature::{log_integrate, simpson_2d};
use crate::special::{log_norm_interval, LN_2PI};

/// A log-likelihood over physical parameters. Implementations must be pure
/// and reentrant; the sampler may call them from several threads.
pub trait LogLikelihood: Send + Sync {
    fn dim(&self) -> usize;
    fn log_likelihood(&self, theta: &[f64]) -> f64;
}

impl<F> LogLikelihood for (usize, F)
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.0
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        (self.1)(theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMeasurementModel {
    pub n_measurements: usize,
    pub noise_mean: Vec<f64>,
    /// Row-major `K × K` noise covariance.
    pub noise_cov: Vec<Vec<f64>>,
}

impl GaussianMeasurementModel {
    pub fn new(n_measurements: usize, noise_mean: Vec<f64>, noise_cov: DMatrix<f64>) -> Result<Self> {
        let k = noise_mean.len();
        if k == 0 {
            return Err(Error::invalid("model dimension must be positive"));
        }
        if n_measurements == 0 {
            return Err(Error::invalid("need at least one measurement"));
        }
        if noise_cov.nrows() != k || noise_cov.ncols() != k {
            return Err(Error::invalid(format!("noise covariance must be {k}x{k}")));
        }
        let model = Self {
            n_measurements,
            noise_mean,
            noise_cov: (0..k).map(|i| noise_cov.row(i).iter().copied().collect()).collect(),
        };
        model.cholesky()?;
        Ok(model)
    }

    /// Independent noise with standard deviation `sigma` in every dimension.
    pub fn isotropic(dim: usize, n_measurements: usize, sigma: f64) -> Result<Self> {
        Self::new(
            n_measurements,
            vec![0.0; dim],
            DMatrix::from_diagonal_element(dim, dim, sigma * sigma),
        )
    }

    pub fn dim(&self) -> usize {
        self.noise_mean.len()
    }

    /// Re-checks a deserialized model.
    pub fn validate(&self) -> Result<()> {
        Self::new(
            self.n_measurements,
            self.noise_mean.clone(),
            self.noise_cov_matrix_checked()?,
        )
        .map(|_| ())
    }

    fn noise_cov_matrix_checked(&self) -> Result<DMatrix<f64>> {
        let k = self.dim();
        if self.noise_cov.len() != k || self.noise_cov.iter().any(|row| row.len() != k) {
            return Err(Error::invalid(format!("noise covariance must be {k}x{k}")));
        }
        Ok(self.noise_cov_matrix())
    }

    pub fn noise_cov_matrix(&self) -> DMatrix<f64> {
        let k = self.dim();
        DMatrix::from_fn(k, k, |i, j| self.noise_cov[i][j])
    }

    fn cholesky(&self) -> Result<DMatrix<f64>> {
        let cov = self.noise_cov_matrix();
        if (&cov - cov.transpose()).abs().max() > 1e-12 * cov.abs().max() {
            return Err(Error::invalid("noise covariance must be symmetric"));
        }
        cov.cholesky()
            .map(|c| c.l())
            .ok_or_else(|| Error::invalid("noise covariance must be positive definite"))
    }

    fn is_diagonal_noise(&self) -> bool {
        let k = self.dim();
        (0..k).all(|i| (0..k).all(|j| i == j || self.noise_cov[i][j] == 0.0))
    }

    /// Draw `N` measurements around `theta_star`, reproducibly from `seed`.
    pub fn simulate_dataset(&self, theta_star: &[f64], seed: u64) -> Result<Dataset> {
        Error::check_dim(self.dim(), theta_star.len())?;
        let l = self.cholesky()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.dim();
        let measurements = (0..self.n_measurements)
            .map(|_| {
                let z = DVector::from_iterator(k, (0..k).map(|_| StandardNormal.sample(&mut rng)));
                let xi = &l * z;
                (0..k).map(|i| theta_star[i] + self.noise_mean[i] + xi[i]).collect()
            })
            .collect();
        Ok(Dataset {
            measurements,
            theta_star: theta_star.to_vec(),
            seed,
        })
    }

    /// Likelihood handle bound to a dataset.
    pub fn likelihood(&self, data: &Dataset) -> Result<GaussianLikelihood> {
        GaussianLikelihood::new(self, data)
    }

    /// `ln L(θ)` for one dataset.
    pub fn log_likelihood(&self, data: &Dataset, theta: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), theta.len())?;
        Ok(self.likelihood(data)?.log_likelihood(theta))
    }

    /// Conjugate Gaussian posterior, ignoring any truncation of the prior.
    pub fn analytic_posterior(&self, data: &Dataset, prior: &PriorSpec) -> Result<AnalyticPosterior> {
        let like = self.likelihood(data)?;
        Error::check_dim(self.dim(), prior.dim())?;
        let k = self.dim();
        let n = self.n_measurements as f64;
        let like_precision = like.precision.clone() * n;
        let (prior_precision, prior_mean) = match prior.kind() {
            PriorKind::UniformBox => (DMatrix::zeros(k, k), DVector::zeros(k)),
            PriorKind::TruncatedGaussianDiagonal => (
                DMatrix::from_diagonal(&DVector::from_iterator(k, prior.scale().iter().map(|s| 1.0 / (s * s)))),
                DVector::from_column_slice(prior.mean()),
            ),
            PriorKind::GaussianFullCovariance => (
                prior
                    .covariance()
                    .expect("full covariance")
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::Invariant("prior covariance not invertible".into()))?,
                DVector::from_column_slice(prior.mean()),
            ),
        };
        let precision = &prior_precision + &like_precision;
        let cov = precision
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Invariant("posterior precision not invertible".into()))?;
        let rhs = &prior_precision * prior_mean + &like_precision * &like.centroid;
        let mean = &cov * rhs;
        let mean: Vec<f64> = mean.iter().copied().collect();
        // union bound on the Gaussian mass outside the support box
        let outside: f64 = (0..k)
            .map(|i| {
                let sd = cov[(i, i)].sqrt();
                let lo = (prior.lower()[i] - mean[i]) / sd;
                let hi = (prior.upper()[i] - mean[i]) / sd;
                -log_norm_interval(lo, hi).exp_m1()
            })
            .sum();
        Ok(AnalyticPosterior {
            mean,
            cov,
            truncation_warning: outside > 1e-6,
        })
    }

    /// Ground-truth `ln Z` for this model, dataset and prior.
    ///
    /// Independent priors with independent noise factorise into 1D adaptive
    /// quadratures. Unbounded Gaussian priors use the closed-form Gaussian
    /// convolution. A bounded prior with correlated noise falls back to a 2D
    /// tensor grid (K = 2 only).
    pub fn oracle_log_evidence(&self, data: &Dataset, prior: &PriorSpec) -> Result<f64> {
        Error::check_dim(self.dim(), prior.dim())?;
        let like = self.likelihood(data)?;
        if !prior.is_bounded() && prior.kind() != PriorKind::UniformBox {
            return self.closed_form_log_evidence(&like, prior);
        }
        if prior.kind() == PriorKind::GaussianFullCovariance {
            return Err(Error::unsupported("bounded correlated prior"));
        }
        if self.is_diagonal_noise() {
            let post = self.analytic_posterior(data, prior)?;
            let mut total = 0.0;
            for k in 0..self.dim() {
                let sd = post.cov[(k, k)].sqrt();
                let peak = post.mean[k].clamp(prior.lower()[k], prior.upper()[k]);
                let sigma = self.noise_cov[k][k];
                let col: Vec<f64> = data.measurements.iter().map(|m| m[k] - self.noise_mean[k]).collect();
                let log_like_k = |x: f64| -> f64 {
                    col.iter()
                        .map(|m| -0.5 * (LN_2PI + sigma.ln()) - 0.5 * (x - m).powi(2) / sigma)
                        .sum()
                };
                total += oracle_log_evidence_1d(
                    |x| log_like_k(x) + prior.marginal_log_density(k, x).unwrap_or(f64::NEG_INFINITY),
                    prior.lower()[k],
                    prior.upper()[k],
                    peak,
                    sd,
                );
            }
            return Ok(total);
        }
        if self.dim() == 2 {
            let post = self.analytic_posterior(data, prior)?;
            return Ok(log_evidence_2d_grid(&like, prior, &post));
        }
        Err(Error::unsupported(
            "quadrature oracle for correlated noise needs K <= 2",
        ))
    }

    fn closed_form_log_evidence(&self, like: &GaussianLikelihood, prior: &PriorSpec) -> Result<f64> {
        let k = self.dim() as f64;
        let n = self.n_measurements as f64;
        let prior_cov = match prior.covariance() {
            Some(c) => c.clone(),
            None => DMatrix::from_diagonal(&DVector::from_iterator(self.dim(), prior.scale().iter().map(|s| s * s))),
        };
        let noise = self.noise_cov_matrix();
        let marginal_cov = prior_cov + &noise / n;
        let chol = marginal_cov
            .cholesky()
            .ok_or_else(|| Error::Invariant("marginal covariance not positive definite".into()))?;
        let diff = &like.centroid - DVector::from_column_slice(prior.mean());
        let z = chol.l().solve_lower_triangular(&diff).expect("nonsingular");
        let log_det_marginal = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let log_gauss = -0.5 * (k * LN_2PI + log_det_marginal + z.norm_squared());
        Ok(
            -0.5 * k * (n - 1.0) * LN_2PI - 0.5 * (n - 1.0) * like.log_det - 0.5 * k * n.ln() - 0.5 * like.scatter
                + log_gauss,
        )
    }
}

/// `ln ∫ exp(log_integrand)` over `[a, b]` by adaptive quadrature, refined
/// around a peak of width `sd`.
pub fn oracle_log_evidence_1d<F: Fn(f64) -> f64>(log_integrand: F, a: f64, b: f64, peak: f64, sd: f64) -> f64 {
    let mut focus: Vec<f64> = [-40.0, -20.0, -10.0, -5.0, -2.0, 0.0, 2.0, 5.0, 10.0, 20.0, 40.0]
        .iter()
        .map(|c| peak + c * sd)
        .collect();
    focus.retain(|x| x.is_finite());
    let (lo, hi) = (
        if a.is_finite() { a } else { peak - 60.0 * sd },
        if b.is_finite() { b } else { peak + 60.0 * sd },
    );
    log_integrate(log_integrand, lo, hi, &focus, 1e-12)
}

fn log_evidence_2d_grid(like: &GaussianLikelihood, prior: &PriorSpec, post: &AnalyticPosterior) -> f64 {
    let window = |i: usize| {
        let sd = post.cov[(i, i)].sqrt();
        (
            (post.mean[i] - 12.0 * sd).max(prior.lower()[i]),
            (post.mean[i] + 12.0 * sd).min(prior.upper()[i]),
        )
    };
    let (wx, wy) = (window(0), window(1));
    let center = [
        post.mean[0].clamp(prior.lower()[0], prior.upper()[0]),
        post.mean[1].clamp(prior.lower()[1], prior.upper()[1]),
    ];
    let log_f = |x: f64, y: f64| like.log_likelihood(&[x, y]) + prior.log_density_unchecked(&[x, y]);
    let shift = log_f(center[0], center[1]);
    let f = |x: f64, y: f64| (log_f(x, y) - shift).exp();
    let fine = simpson_2d(f, wx, wy, 400);
    let coarse = simpson_2d(f, wx, wy, 200);
    // Simpson error is O(h^4): Richardson step
    shift + (fine + (fine - coarse) / 15.0).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticPosterior {
    pub mean: Vec<f64>,
    pub cov: DMatrix<f64>,
    /// Set when more than 1e-6 of the untruncated posterior mass falls
    /// outside the prior support, so the Gaussian form is only approximate.
    pub truncation_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    /// `N` rows of `K` values.
    pub measurements: Vec<Vec<f64>>,
    pub theta_star: Vec<f64>,
    pub seed: u64,
}

#[derive(Serialize)]
struct DatasetSidecar<'a> {
    seed: u64,
    theta_star: &'a [f64],
    model: &'a GaussianMeasurementModel,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn sample_mean(&self) -> Vec<f64> {
        let n = self.measurements.len() as f64;
        (0..self.dim())
            .map(|k| self.measurements.iter().map(|m| m[k]).sum::<f64>() / n)
            .collect()
    }

    /// Writes `<stem>.csv` (columns `m_1..m_K`) and `<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str, model: &GaussianMeasurementModel) -> Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|k| format!("m_{k}")).collect();
        let rows: Vec<Vec<Cell>> = self
            .measurements
            .iter()
            .map(|m| m.iter().map(|&x| Cell::Float(x)).collect())
            .collect();
        write_csv(&dir.join(format!("{stem}.csv")), &header, &rows)?;
        write_json(
            &dir.join(format!("{stem}.json")),
            &DatasetSidecar {
                seed: self.seed,
                theta_star: &self.theta_star,
                model,
            },
        )
    }
}

/// `ln L(θ)` for the Gaussian measurement model, evaluated through the
/// sufficient statistics `Σ r_nᵀ P r_n = N (θ - r̄)ᵀ P (θ - r̄) + S`.
#[derive(Debug, Clone)]
pub struct GaussianLikelihood {
    n: f64,
    precision: DMatrix<f64>,
    centroid: DVector<f64>,
    scatter: f64,
    log_det: f64,
    constant: f64,
}

impl GaussianLikelihood {
    fn new(model: &GaussianMeasurementModel, data: &Dataset) -> Result<Self> {
        let k = model.dim();
        Error::check_dim(k, data.dim())?;
        if data.measurements.len() != model.n_measurements {
            return Err(Error::invalid(format!(
                "dataset has {} measurements, model expects {}",
                data.measurements.len(),
                model.n_measurements
            )));
        }
        if let Some(row) = data.measurements.iter().find(|m| m.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: row.len(),
            });
        }
        let l = model.cholesky()?;
        let log_det = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let precision = model
            .noise_cov_matrix()
            .try_inverse()
            .ok_or_else(|| Error::invalid("noise covariance not invertible"))?;
        let n = model.n_measurements as f64;
        let residuals: Vec<DVector<f64>> = data
            .measurements
            .iter()
            .map(|m| DVector::from_iterator(k, m.iter().zip(&model.noise_mean).map(|(x, mu)| x - mu)))
            .collect();
        let centroid = residuals.iter().fold(DVector::zeros(k), |acc, r| acc + r) / n;
        let scatter = residuals
            .iter()
            .map(|r| {
                let d = r - &centroid;
                (d.transpose() * &precision * &d)[(0, 0)]
            })
            .sum();
        let constant = -0.5 * n * (k as f64 * LN_2PI + log_det) - 0.5 * scatter;
        Ok(Self {
            n,
            precision,
            centroid,
            scatter,
            log_det,
            constant,
        })
    }

    /// Mean of `m_n - μ_ξ`: the maximiser of the likelihood.
    pub fn centroid(&self) -> Vec<f64> {
        self.centroid.iter().copied().collect()
    }
}

impl LogLikelihood for GaussianLikelihood {
    fn dim(&self) -> usize {
        self.centroid.len()
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let k = self.centroid.len();
        let mut q = 0.0;
        for i in 0..k {
            let di = theta[i] - self.centroid[i];
            for (j, tj) in theta.iter().enumerate().take(k) {
                q += di * self.precision[(i, j)] * (tj - self.centroid[j]);
            }
        }
        self.constant - 0.5 * self.n * q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Naive per-measurement summation of Gaussian log-densities.
    fn naive_log_likelihood(model: &GaussianMeasurementModel, data: &Dataset, theta: &[f64]) -> f64 {
        let k = model.dim();
        let cov = model.noise_cov_matrix();
        let inv = cov.clone().try_inverse().unwrap();
        let det = cov.determinant();
        data.measurements
            .iter()
            .map(|m| {
                let r = DVector::from_iterator(k, (0..k).map(|i| theta[i] - (m[i] - model.noise_mean[i])));
                -0.5 * (k as f64 * LN_2PI + det.ln()) - 0.5 * (r.transpose() * &inv * &r)[(0, 0)]
            })
            .sum()
    }

    #[test]
    fn simulation_is_seeded() {
        let model = GaussianMeasurementModel::isotropic(1, 20, 1.0).unwrap();
        let a = model.simulate_dataset(&[5.0], 7).unwrap();
        let b = model.simulate_dataset(&[5.0], 7).unwrap();
        let c = model.simulate_dataset(&[5.0], 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.sample_mean()[0] - 5.0).abs() < 4.0 / 20f64.sqrt());
        assert!(model.simulate_dataset(&[5.0, 1.0], 1).is_err());
    }

    #[test]
    fn vanishing_noise_reproduces_truth() {
        let model = GaussianMeasurementModel::isotropic(2, 5, 1e-12).unwrap();
        let data = model.simulate_dataset(&[3.0, -4.0], 1).unwrap();
        for m in &data.measurements {
            assert!((m[0] - 3.0).abs() < 1e-9 && (m[1] + 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn log_likelihood_examples() {
        let model = GaussianMeasurementModel::isotropic(2, 1, 1.0).unwrap();
        let data = Dataset {
            measurements: vec![vec![40.3, 39.1]],
            theta_star: vec![40.0, 40.0],
            seed: 0,
        };
        assert_relative_eq!(
            model.log_likelihood(&data, &[40.3, 39.1]).unwrap(),
            -(2.0 * std::f64::consts::PI).ln(),
            max_relative = 1e-14
        );

        let model = GaussianMeasurementModel::isotropic(1, 20, 1.0).unwrap();
        let data = model.simulate_dataset(&[5.0], 3).unwrap();
        let like = model.likelihood(&data).unwrap();
        let mean = data.sample_mean()[0];
        assert_relative_eq!(like.centroid()[0], mean, epsilon = 1e-12);
        let at_max = like.log_likelihood(&[mean]);
        assert!(at_max > like.log_likelihood(&[mean + 1e-4]));
        assert!(at_max > like.log_likelihood(&[mean - 1e-4]));
    }

    #[test]
    fn log_likelihood_matches_naive_summation() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
        let model = GaussianMeasurementModel::new(7, vec![0.2, -0.1], cov).unwrap();
        let data = model.simulate_dataset(&[1.0, 2.0], 11).unwrap();
        for theta in [[0.0, 0.0], [1.3, 2.2], [-5.0, 10.0]] {
            let fast = model.log_likelihood(&data, &theta).unwrap();
            let slow = naive_log_likelihood(&model, &data, &theta);
            assert_relative_eq!(fast, slow, max_relative = 1e-12);
        }
    }

    #[test]
    fn translation_invariance() {
        let model = GaussianMeasurementModel::isotropic(3, 4, 1.5).unwrap();
        let data = model.simulate_dataset(&[1.0, 2.0, 3.0], 5).unwrap();
        let delta = [0.7, -3.0, 12.5];
        let shifted = Dataset {
            measurements: data
                .measurements
                .iter()
                .map(|m| m.iter().zip(&delta).map(|(x, d)| x + d).collect())
                .collect(),
            ..data.clone()
        };
        let theta = [0.4, 2.5, 2.0];
        let moved: Vec<f64> = theta.iter().zip(&delta).map(|(x, d)| x + d).collect();
        assert_relative_eq!(
            model.log_likelihood(&data, &theta).unwrap(),
            model.log_likelihood(&shifted, &moved).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn posterior_closed_forms() {
        let model = GaussianMeasurementModel::isotropic(1, 20, 1.0).unwrap();
        let data = model.simulate_dataset(&[5.0], 1).unwrap();
        let prior = PriorSpec::symmetric(1, 0.0, 4.0).unwrap();
        let post = model.analytic_posterior(&data, &prior).unwrap();
        assert_relative_eq!(
            post.cov[(0, 0)].sqrt(),
            1.0 / (20.0f64 + 1.0 / 16.0).sqrt(),
            max_relative = 1e-12
        );
        assert!((post.cov[(0, 0)].sqrt() - 0.2233).abs() < 1e-4);
        assert!(!post.truncation_warning);

        let flat = PriorSpec::symmetric(1, 0.0, 1e8).unwrap();
        let post = model.analytic_posterior(&data, &flat).unwrap();
        assert_relative_eq!(post.mean[0], data.sample_mean()[0], epsilon = 1e-9);

        // equal precisions: midpoint of prior mean and measurement
        let single = GaussianMeasurementModel::isotropic(1, 1, 2.0).unwrap();
        let d = Dataset {
            measurements: vec![vec![6.0]],
            theta_star: vec![6.0],
            seed: 0,
        };
        let p = PriorSpec::symmetric(1, 0.0, 2.0).unwrap();
        assert_relative_eq!(single.analytic_posterior(&d, &p).unwrap().mean[0], 3.0, epsilon = 1e-12);

        let edge = model.simulate_dataset(&[50.0], 1).unwrap();
        assert!(model.analytic_posterior(&edge, &prior).unwrap().truncation_warning);
    }

    #[test]
    fn posterior_density_normalises() {
        let model = GaussianMeasurementModel::isotropic(1, 20, 1.0).unwrap();
        let data = model.simulate_dataset(&[5.0], 2).unwrap();
        let prior = PriorSpec::symmetric(1, 0.0, 4.0).unwrap();
        let post = model.analytic_posterior(&data, &prior).unwrap();
        let sd = post.cov[(0, 0)].sqrt();
        let m = post.mean[0];
        let mass = crate::quadrature::log_integrate(
            |x| crate::special::log_norm_pdf((x - m) / sd) - sd.ln(),
            -50.0,
            50.0,
            &[m - 5.0 * sd, m, m + 5.0 * sd],
            1e-12,
        );
        assert!(mass.abs() < 1e-6);
    }

    #[test]
    fn oracle_anchor_and_cross_checks() {
        // constant likelihood c: ln Z = ln c
        let prior = PriorSpec::symmetric(1, 0.0, 4.0).unwrap();
        let v = oracle_log_evidence_1d(|x| -3.5 + prior.log_density(&[x]).unwrap(), -50.0, 50.0, 0.0, 4.0);
        assert_relative_eq!(v, -3.5, epsilon = 1e-10);

        // representative case lands at the magnitude of the published anchor
        let model = GaussianMeasurementModel::isotropic(1, 20, 1.0).unwrap();
        let data = model.simulate_dataset(&[5.0], 1).unwrap();
        let z = model.oracle_log_evidence(&data, &prior).unwrap();
        assert!(z < -20.0 && z > -45.0, "{z}");

        // bounded quadrature vs untruncated closed form where truncation is negligible
        let unbounded = PriorSpec::gaussian_diagonal_unbounded(vec![0.0], vec![4.0]).unwrap();
        let closed = model.oracle_log_evidence(&data, &unbounded).unwrap();
        assert_relative_eq!(z, closed, epsilon = 1e-6);
    }

    #[test]
    fn bivariate_oracle_factorises_and_matches_grid() {
        let model = GaussianMeasurementModel::isotropic(2, 1, 1.0).unwrap();
        let data = model.simulate_dataset(&[40.0, 40.0], 4).unwrap();
        let prior =
            PriorSpec::truncated_gaussian(vec![0.0, 0.0], vec![2.0, 4.0], vec![-50.0; 2], vec![50.0; 2]).unwrap();
        let joint = model.oracle_log_evidence(&data, &prior).unwrap();
        let mut parts = 0.0;
        for k in 0..2 {
            let m1 = GaussianMeasurementModel::isotropic(1, 1, 1.0).unwrap();
            let d1 = Dataset {
                measurements: vec![vec![data.measurements[0][k]]],
                theta_star: vec![40.0],
                seed: 0,
            };
            let p1 = PriorSpec::truncated_gaussian(vec![0.0], vec![prior.scale()[k]], vec![-50.0], vec![50.0]).unwrap();
            parts += m1.oracle_log_evidence(&d1, &p1).unwrap();
        }
        assert_relative_eq!(joint, parts, epsilon = 1e-6);

        let post = model.analytic_posterior(&data, &prior).unwrap();
        let grid = log_evidence_2d_grid(&model.likelihood(&data).unwrap(), &prior, &post);
        assert_relative_eq!(joint, grid, epsilon = 1e-6);

        // the published anchor for the (4, 4) prior is about -98.8
        let p44 = PriorSpec::symmetric(2, 0.0, 4.0).unwrap();
        let z = model.oracle_log_evidence(&data, &p44).unwrap();
        assert!((z + 98.8).abs() < 5.0, "{z}");
    }

    #[test]
    fn correlated_closed_form_matches_grid() {
        let model = GaussianMeasurementModel::isotropic(2, 1, 1.0).unwrap();
        let data = model.simulate_dataset(&[40.0, 40.0], 9).unwrap();
        let prior = PriorSpec::correlated_2d((4.0, 4.0), 0.75).unwrap();
        let closed = model.oracle_log_evidence(&data, &prior).unwrap();
        let post = model.analytic_posterior(&data, &prior).unwrap();
        let grid = log_evidence_2d_grid(&model.likelihood(&data).unwrap(), &prior, &post);
        assert_relative_eq!(closed, grid, epsilon = 1e-6);
        assert!((closed + 59.5).abs() < 5.0, "{closed}");
    }
}
