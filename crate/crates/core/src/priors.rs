//! Gaussian prior family and its powered, renormalised modification
//! `π̃(θ|β) = π(θ)^β / Z_π(β)`.
//!
//! Sampling from `π̃(θ|β)` goes through deterministic maps from the unit
//! hypercube so that the nested sampler can work entirely in cube
//! coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{log_norm_interval, log_norm_pdf, norm_ppf, truncated_norm_cdf, truncated_norm_ppf, LN_2PI};

/// β below this is treated as exactly zero (uniform branch).
pub const BETA_ZERO: f64 = 1e-12;
pub const DEFAULT_BETA_MIN: f64 = 1e-3;
pub const DEFAULT_SUPPORT: (f64, f64) = (-50.0, 50.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    TruncatedGaussianDiagonal,
    GaussianFullCovariance,
    UniformBox,
}

/// Serializable description of a prior, as it appears in run configuration
/// files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PriorConfig {
    TruncatedGaussianDiagonal {
        mean: Vec<f64>,
        scale: Vec<f64>,
        /// Defaults to -50 per dimension.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Vec<f64>>,
        /// Defaults to +50 per dimension.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<Vec<f64>>,
        /// Drop the support box entirely (β then needs a positive floor).
        #[serde(default)]
        unbounded: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta_min: Option<f64>,
    },
    GaussianFullCovariance {
        mean: Vec<f64>,
        covariance: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta_min: Option<f64>,
    },
    UniformBox {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

impl PriorConfig {
    pub fn build(&self) -> Result<PriorSpec> {
        match self {
            PriorConfig::TruncatedGaussianDiagonal {
                mean,
                scale,
                lower,
                upper,
                unbounded,
                beta_min,
            } => {
                let k = mean.len();
                let spec = if *unbounded {
                    if lower.is_some() || upper.is_some() {
                        return Err(Error::invalid("unbounded prior cannot also declare lower/upper"));
                    }
                    PriorSpec::gaussian_diagonal_unbounded(mean.clone(), scale.clone())?
                } else {
                    let lower = lower.clone().unwrap_or_else(|| vec![DEFAULT_SUPPORT.0; k]);
                    let upper = upper.clone().unwrap_or_else(|| vec![DEFAULT_SUPPORT.1; k]);
                    PriorSpec::truncated_gaussian(mean.clone(), scale.clone(), lower, upper)?
                };
                match beta_min {
                    Some(b) => spec.with_beta_min(*b),
                    None => Ok(spec),
                }
            }
            PriorConfig::GaussianFullCovariance {
                mean,
                covariance,
                beta_min,
            } => {
                let k = mean.len();
                if covariance.len() != k || covariance.iter().any(|row| row.len() != k) {
                    return Err(Error::invalid(format!("covariance must be {k}x{k}")));
                }
                let cov = DMatrix::from_fn(k, k, |i, j| covariance[i][j]);
                let spec = PriorSpec::gaussian_full(mean.clone(), cov)?;
                match beta_min {
                    Some(b) => spec.with_beta_min(*b),
                    None => Ok(spec),
                }
            }
            PriorConfig::UniformBox { lower, upper } => PriorSpec::uniform_box(lower.clone(), upper.clone()),
        }
    }
}

/// A validated prior `π(θ)`.
#[derive(Debug, Clone)]
pub struct PriorSpec {
    kind: PriorKind,
    mean: Vec<f64>,
    /// Per-dimension standard deviations (marginal ones for the full case).
    scale: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// `ln(σ_k Δ_k)` per dimension for the diagonal case.
    log_mass: Vec<f64>,
    covariance: Option<DMatrix<f64>>,
    cholesky: Option<DMatrix<f64>>,
    log_det: f64,
    beta_min: f64,
}

/// `π̃(θ|β)` summary: β, `ln Z_π(β)` and the powered per-dimension scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPriorEval {
    pub beta: f64,
    pub log_norm: f64,
    /// `σ/√β` per dimension; infinite at β = 0.
    pub effective_scale: Vec<f64>,
}

/// One row of the prior-evolution table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriorCurveRow {
    pub beta: f64,
    pub theta: f64,
    pub density: f64,
}

fn check_box(lower: &[f64], upper: &[f64]) -> Result<()> {
    for (k, (a, b)) in lower.iter().zip(upper).enumerate() {
        if a.is_nan() || b.is_nan() || !(a < b) {
            return Err(Error::invalid(format!(
                "support bounds for dimension {k} must satisfy lower < upper"
            )));
        }
    }
    Ok(())
}

fn check_scale(scale: &[f64]) -> Result<()> {
    if let Some(k) = scale.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::invalid(format!("scale[{k}] must be finite and > 0")));
    }
    Ok(())
}

impl PriorSpec {
    /// Independent Gaussians truncated to a box.
    pub fn truncated_gaussian(mean: Vec<f64>, scale: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let k = mean.len();
        if k == 0 {
            return Err(Error::invalid("prior must have at least one dimension"));
        }
        Error::check_dim(k, scale.len())?;
        Error::check_dim(k, lower.len())?;
        Error::check_dim(k, upper.len())?;
        check_scale(&scale)?;
        check_box(&lower, &upper)?;
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("prior mean must be finite"));
        }
        let log_mass = (0..k)
            .map(|i| {
                let s = scale[i];
                s.ln() + log_norm_interval((lower[i] - mean[i]) / s, (upper[i] - mean[i]) / s)
            })
            .collect();
        Ok(Self {
            kind: PriorKind::TruncatedGaussianDiagonal,
            mean,
            scale,
            lower,
            upper,
            log_mass,
            covariance: None,
            cholesky: None,
            log_det: 0.0,
            beta_min: DEFAULT_BETA_MIN,
        })
    }

    /// Isotropic prior with the default `[-50, 50]` support per dimension.
    pub fn symmetric(dim: usize, mean: f64, sigma: f64) -> Result<Self> {
        Self::truncated_gaussian(
            vec![mean; dim],
            vec![sigma; dim],
            vec![DEFAULT_SUPPORT.0; dim],
            vec![DEFAULT_SUPPORT.1; dim],
        )
    }

    pub fn gaussian_diagonal_unbounded(mean: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        let k = mean.len();
        Self::truncated_gaussian(mean, scale, vec![f64::NEG_INFINITY; k], vec![f64::INFINITY; k])
    }

    /// Correlated Gaussian on all of `R^K`.
    pub fn gaussian_full(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let k = mean.len();
        if k == 0 {
            return Err(Error::invalid("prior must have at least one dimension"));
        }
        if covariance.nrows() != k || covariance.ncols() != k {
            return Err(Error::invalid(format!("covariance must be {k}x{k}")));
        }
        let asym = (&covariance - covariance.transpose()).abs().max();
        if !(asym <= 1e-12 * covariance.abs().max()) {
            return Err(Error::invalid("covariance must be symmetric"));
        }
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| Error::invalid("covariance must be positive definite"))?;
        let l = chol.l();
        let log_det = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let scale = (0..k).map(|i| covariance[(i, i)].sqrt()).collect();
        Ok(Self {
            kind: PriorKind::GaussianFullCovariance,
            mean,
            scale,
            lower: vec![f64::NEG_INFINITY; k],
            upper: vec![f64::INFINITY; k],
            log_mass: vec![0.0; k],
            covariance: Some(covariance),
            cholesky: Some(l),
            log_det,
            beta_min: DEFAULT_BETA_MIN,
        })
    }

    /// Two-dimensional correlated prior from marginal scales and a correlation.
    pub fn correlated_2d(sigma: (f64, f64), rho: f64) -> Result<Self> {
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::invalid("correlation must lie in (-1, 1)"));
        }
        let c = rho * sigma.0 * sigma.1;
        let cov = DMatrix::from_row_slice(2, 2, &[sigma.0 * sigma.0, c, c, sigma.1 * sigma.1]);
        Self::gaussian_full(vec![0.0, 0.0], cov)
    }

    pub fn uniform_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let k = lower.len();
        if k == 0 {
            return Err(Error::invalid("prior must have at least one dimension"));
        }
        Error::check_dim(k, upper.len())?;
        check_box(&lower, &upper)?;
        if lower.iter().chain(&upper).any(|x| !x.is_finite()) {
            return Err(Error::invalid("uniform prior needs a finite box"));
        }
        let mean = lower.iter().zip(&upper).map(|(a, b)| 0.5 * (a + b)).collect();
        let scale = lower.iter().zip(&upper).map(|(a, b)| (b - a) / 12f64.sqrt()).collect();
        Ok(Self {
            kind: PriorKind::UniformBox,
            mean,
            scale,
            lower,
            upper,
            log_mass: vec![0.0; k],
            covariance: None,
            cholesky: None,
            log_det: 0.0,
            beta_min: 0.0,
        })
    }

    /// Override the smallest admissible β for unbounded priors.
    pub fn with_beta_min(mut self, beta_min: f64) -> Result<Self> {
        if !(beta_min > 0.0 && beta_min < 1.0) {
            return Err(Error::invalid("beta_min must lie in (0, 1)"));
        }
        self.beta_min = beta_min;
        Ok(self)
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn covariance(&self) -> Option<&DMatrix<f64>> {
        self.covariance.as_ref()
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|x| x.is_finite())
    }

    /// Smallest admissible β: zero for bounded supports.
    pub fn beta_min(&self) -> f64 {
        if self.is_bounded() {
            0.0
        } else {
            self.beta_min
        }
    }

    pub fn in_support(&self, theta: &[f64]) -> bool {
        theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (a, b))| x >= a && x <= b)
    }

    pub fn log_support_volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| (b - a).ln()).sum()
    }

    /// Serializable form of this prior.
    pub fn config(&self) -> PriorConfig {
        match self.kind {
            PriorKind::TruncatedGaussianDiagonal => {
                let unbounded = !self.is_bounded();
                PriorConfig::TruncatedGaussianDiagonal {
                    mean: self.mean.clone(),
                    scale: self.scale.clone(),
                    lower: (!unbounded).then(|| self.lower.clone()),
                    upper: (!unbounded).then(|| self.upper.clone()),
                    unbounded,
                    beta_min: unbounded.then_some(self.beta_min),
                }
            }
            PriorKind::GaussianFullCovariance => {
                let cov = self.covariance.as_ref().expect("full covariance");
                PriorConfig::GaussianFullCovariance {
                    mean: self.mean.clone(),
                    covariance: (0..self.dim()).map(|i| cov.row(i).iter().copied().collect()).collect(),
                    beta_min: Some(self.beta_min),
                }
            }
            PriorKind::UniformBox => PriorConfig::UniformBox {
                lower: self.lower.clone(),
                upper: self.upper.clone(),
            },
        }
    }

    /// Validate β against `[beta_min, 1]`.
    pub fn check_beta(&self, beta: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::invalid(format!("beta = {beta} outside [0, 1]")));
        }
        if beta < self.beta_min() {
            return Err(Error::unsupported(format!(
                "beta = {beta} below beta_min = {} for a prior with unbounded support",
                self.beta_min()
            )));
        }
        Ok(())
    }

    /// `ln π(θ)`; `-inf` outside the support.
    pub fn log_density(&self, theta: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), theta.len())?;
        Ok(self.log_density_unchecked(theta))
    }

    pub(crate) fn log_density_unchecked(&self, theta: &[f64]) -> f64 {
        if !self.in_support(theta) {
            return f64::NEG_INFINITY;
        }
        match self.kind {
            PriorKind::TruncatedGaussianDiagonal => (0..self.dim())
                .map(|k| log_norm_pdf((theta[k] - self.mean[k]) / self.scale[k]) - self.log_mass[k])
                .sum(),
            PriorKind::GaussianFullCovariance => {
                let q = self.mahalanobis_sq(theta);
                -0.5 * (self.dim() as f64 * LN_2PI + self.log_det + q)
            }
            PriorKind::UniformBox => -self.log_support_volume(),
        }
    }

    fn mahalanobis_sq(&self, theta: &[f64]) -> f64 {
        let l = self.cholesky.as_ref().expect("full covariance");
        let diff = DVector::from_iterator(self.dim(), theta.iter().zip(&self.mean).map(|(x, m)| x - m));
        let z = l.solve_lower_triangular(&diff).expect("cholesky factor is nonsingular");
        z.norm_squared()
    }

    /// `ln Z_π(β) = ln ∫ π(θ)^β dθ`.
    pub fn log_power_norm(&self, beta: f64) -> Result<f64> {
        self.check_beta(beta)?;
        Ok(self.log_power_norm_unchecked(beta))
    }

    pub(crate) fn log_power_norm_unchecked(&self, beta: f64) -> f64 {
        if beta == 1.0 {
            return 0.0;
        }
        let k = self.dim() as f64;
        match self.kind {
            PriorKind::UniformBox => (1.0 - beta) * self.log_support_volume(),
            PriorKind::GaussianFullCovariance => {
                0.5 * k * (1.0 - beta) * LN_2PI + 0.5 * (1.0 - beta) * self.log_det - 0.5 * k * beta.ln()
            }
            PriorKind::TruncatedGaussianDiagonal => {
                if beta < BETA_ZERO {
                    return self.log_support_volume();
                }
                let root = beta.sqrt();
                (0..self.dim())
                    .map(|i| {
                        let (m, s) = (self.mean[i], self.scale[i]);
                        let powered_mass =
                            log_norm_interval(root * (self.lower[i] - m) / s, root * (self.upper[i] - m) / s);
                        -beta * self.log_mass[i] + 0.5 * (1.0 - beta) * LN_2PI + s.ln() - 0.5 * beta.ln() + powered_mass
                    })
                    .sum()
            }
        }
    }

    pub fn power(&self, beta: f64) -> Result<PowerPriorEval> {
        let log_norm = self.log_power_norm(beta)?;
        let effective_scale = self
            .scale
            .iter()
            .map(|s| {
                if beta < BETA_ZERO {
                    f64::INFINITY
                } else {
                    s / beta.sqrt()
                }
            })
            .collect();
        Ok(PowerPriorEval {
            beta,
            log_norm,
            effective_scale,
        })
    }

    /// `ln π̃(θ|β) = β ln π(θ) - ln Z_π(β)`.
    pub fn log_modified_prior_density(&self, beta: f64, theta: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), theta.len())?;
        self.check_beta(beta)?;
        if !self.in_support(theta) {
            return Ok(f64::NEG_INFINITY);
        }
        let log_prior = self.log_density_unchecked(theta);
        Ok(beta * log_prior - self.log_power_norm_unchecked(beta))
    }

    /// Map a unit-cube point onto a draw from `π̃(θ|β)`.
    pub fn transform_conditional(&self, beta: f64, u: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dim(), u.len())?;
        self.check_beta(beta)?;
        if let Some(k) = u.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::invalid(format!("u[{k}] = {} outside [0, 1]", u[k])));
        }
        let mut theta = vec![0.0; self.dim()];
        self.transform_into(beta, u, &mut theta);
        Ok(theta)
    }

    /// Unchecked transform into a caller-provided buffer.
    pub(crate) fn transform_into(&self, beta: f64, u: &[f64], theta: &mut [f64]) {
        match self.kind {
            PriorKind::UniformBox => {
                for k in 0..self.dim() {
                    theta[k] = self.lower[k] + u[k] * (self.upper[k] - self.lower[k]);
                }
            }
            PriorKind::TruncatedGaussianDiagonal => {
                for k in 0..self.dim() {
                    let (a, b) = (self.lower[k], self.upper[k]);
                    theta[k] = if beta < BETA_ZERO {
                        a + u[k] * (b - a)
                    } else {
                        let s = self.scale[k] / beta.sqrt();
                        let m = self.mean[k];
                        m + s * truncated_norm_ppf((a - m) / s, (b - m) / s, u[k])
                    };
                }
            }
            PriorKind::GaussianFullCovariance => {
                let l = self.cholesky.as_ref().expect("full covariance");
                let z = DVector::from_iterator(self.dim(), u.iter().map(|&x| norm_ppf(x)));
                let x = l * z / beta.sqrt();
                for k in 0..self.dim() {
                    theta[k] = self.mean[k] + x[k];
                }
            }
        }
    }

    /// `ln π_k(x)` for one coordinate of an independent prior.
    pub fn marginal_log_density(&self, k: usize, x: f64) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::invalid(format!("dimension index {k} out of range")));
        }
        if x < self.lower[k] || x > self.upper[k] {
            return Ok(f64::NEG_INFINITY);
        }
        match self.kind {
            PriorKind::GaussianFullCovariance => Err(Error::unsupported("marginal density of a correlated prior")),
            PriorKind::UniformBox => Ok(-(self.upper[k] - self.lower[k]).ln()),
            PriorKind::TruncatedGaussianDiagonal => {
                Ok(log_norm_pdf((x - self.mean[k]) / self.scale[k]) - self.log_mass[k])
            }
        }
    }

    /// Marginal CDF of dimension `k` under `π̃(·|β)` (independent priors only).
    pub fn marginal_cdf(&self, k: usize, beta: f64, x: f64) -> Result<f64> {
        self.check_beta(beta)?;
        if k >= self.dim() {
            return Err(Error::invalid(format!("dimension index {k} out of range")));
        }
        let (a, b) = (self.lower[k], self.upper[k]);
        match self.kind {
            PriorKind::GaussianFullCovariance => Err(Error::unsupported("marginal CDF of a correlated prior")),
            PriorKind::UniformBox => Ok(((x - a) / (b - a)).clamp(0.0, 1.0)),
            PriorKind::TruncatedGaussianDiagonal if beta < BETA_ZERO => Ok(((x - a) / (b - a)).clamp(0.0, 1.0)),
            PriorKind::TruncatedGaussianDiagonal => {
                let s = self.scale[k] / beta.sqrt();
                let m = self.mean[k];
                Ok(truncated_norm_cdf((a - m) / s, (b - m) / s, (x - m) / s))
            }
        }
    }

    /// `π̃(θ|β)` on a 1D grid for each β in `betas`.
    pub fn emit_prior_evolution(&self, betas: &[f64], grid: &[f64]) -> Result<Vec<PriorCurveRow>> {
        if self.dim() != 1 {
            return Err(Error::unsupported(
                "prior evolution curves need a one-dimensional prior",
            ));
        }
        let mut rows = Vec::with_capacity(betas.len() * grid.len());
        for &beta in betas {
            self.check_beta(beta)?;
            for &theta in grid {
                let density = self.log_modified_prior_density(beta, &[theta])?.exp();
                rows.push(PriorCurveRow { beta, theta, density });
            }
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, log_integrate, simpson_2d};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper_prior() -> PriorSpec {
        PriorSpec::symmetric(1, 0.0, 4.0).unwrap()
    }

    /// Independent oracle: `ln ∫ π(θ)^β dθ` by adaptive quadrature.
    fn quadrature_log_norm(prior: &PriorSpec, beta: f64) -> f64 {
        let (a, b) = (prior.lower()[0], prior.upper()[0]);
        let m = prior.mean()[0];
        log_integrate(
            |x| beta * prior.log_density(&[x]).unwrap(),
            a,
            b,
            &[m - 20.0, m - 5.0, m, m + 5.0, m + 20.0],
            1e-13,
        )
    }

    fn bisect_cdf(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn log_density_at_mode() {
        let p = paper_prior();
        let expected = -(4.0 * (2.0 * std::f64::consts::PI).sqrt()).ln();
        assert_relative_eq!(p.log_density(&[0.0]).unwrap(), expected, epsilon = 1e-12);
        assert_eq!(p.log_density(&[51.0]).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(
            p.log_density(&[0.0, 1.0]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn full_covariance_log_density_matches_quadratic_form() {
        let p = PriorSpec::correlated_2d((4.0, 4.0), 0.75).unwrap();
        // direct 2x2 inverse and determinant
        let (s2, c) = (16.0, 0.75 * 16.0);
        let det: f64 = s2 * s2 - c * c;
        let (x, y) = (40.0, 40.0);
        let q = (s2 * x * x - 2.0 * c * x * y + s2 * y * y) / det;
        let expected = -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln() - 0.5 * q;
        assert_relative_eq!(p.log_density(&[x, y]).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn power_norm_limits() {
        let p = paper_prior();
        assert_relative_eq!(p.log_power_norm(0.0).unwrap(), 100f64.ln(), epsilon = 1e-14);
        assert_eq!(p.log_power_norm(1.0).unwrap(), 0.0);
        let eval = p.power(0.25).unwrap();
        assert_relative_eq!(eval.effective_scale[0], 8.0);
    }

    #[test]
    fn power_norm_matches_quadrature() {
        let priors = [
            paper_prior(),
            PriorSpec::symmetric(1, 0.0, 2.0).unwrap(),
            PriorSpec::truncated_gaussian(vec![1.5], vec![3.0], vec![-10.0], vec![4.0]).unwrap(),
        ];
        for p in &priors {
            for &beta in &[0.0, 0.01, 0.25, 0.5, 1.0] {
                let closed = p.log_power_norm(beta).unwrap();
                let quad = quadrature_log_norm(p, beta);
                let rel = ((closed.exp() - quad.exp()) / quad.exp()).abs();
                assert!(rel < 1e-8, "beta={beta}: closed {closed} quad {quad}");
            }
        }
    }

    #[test]
    fn beta_validation() {
        let p = paper_prior();
        assert!(matches!(p.log_power_norm(1.5), Err(Error::InvalidArgument(_))));
        assert!(matches!(p.log_power_norm(-0.1), Err(Error::InvalidArgument(_))));
        let corr = PriorSpec::correlated_2d((4.0, 4.0), 0.5).unwrap();
        assert!(matches!(corr.log_power_norm(1e-4), Err(Error::Unsupported(_))));
        assert!(corr.log_power_norm(1e-3).is_ok());
    }

    #[test]
    fn full_covariance_power_norm_matches_grid() {
        let p = PriorSpec::correlated_2d((4.0, 2.0), -0.5).unwrap();
        for &beta in &[0.01f64, 0.3, 1.0] {
            let w = 12.0 * 4.0 / beta.sqrt();
            let v = simpson_2d(
                |x, y| (beta * p.log_density(&[x, y]).unwrap()).exp(),
                (-w, w),
                (-w, w),
                600,
            );
            assert_relative_eq!(p.log_power_norm(beta).unwrap(), v.ln(), epsilon = 1e-7);
        }
    }

    #[test]
    fn transform_examples() {
        let p = paper_prior();
        assert_relative_eq!(p.transform_conditional(0.0, &[0.5]).unwrap()[0], 0.0);
        assert_relative_eq!(p.transform_conditional(1.0, &[0.5]).unwrap()[0], 0.0, epsilon = 1e-12);
        let box2 =
            PriorSpec::truncated_gaussian(vec![0.0, 1.0], vec![1.0, 1.0], vec![-3.0, 0.0], vec![5.0, 4.0]).unwrap();
        let mid = box2.transform_conditional(0.0, &[0.5, 0.5]).unwrap();
        assert_relative_eq!(mid[0], 1.0);
        assert_relative_eq!(mid[1], 2.0);

        // β=0.25 on σ=4: truncated Gaussian with scale 8; oracle bisects the CDF
        let theta = p.transform_conditional(0.25, &[0.9]).unwrap()[0];
        let lo = crate::special::norm_cdf(-50.0 / 8.0);
        let hi = crate::special::norm_cdf(50.0 / 8.0);
        let cdf = |x: f64| (crate::special::norm_cdf(x / 8.0) - lo) / (hi - lo);
        let oracle = bisect_cdf(cdf, 0.9, -50.0, 50.0);
        assert!((theta - oracle).abs() < 1e-10, "{theta} vs {oracle}");

        assert!(matches!(
            p.transform_conditional(0.5, &[1.2]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn modified_density_identities() {
        let p = paper_prior();
        for &x in &[-49.0, -3.0, 0.0, 7.5, 40.0] {
            assert_eq!(
                p.log_modified_prior_density(1.0, &[x]).unwrap(),
                p.log_density(&[x]).unwrap()
            );
            assert_relative_eq!(
                p.log_modified_prior_density(0.0, &[x]).unwrap(),
                -100f64.ln(),
                epsilon = 1e-14
            );
        }
        assert_eq!(p.log_modified_prior_density(0.3, &[60.0]).unwrap(), f64::NEG_INFINITY);

        // β=0.5, θ=10 against a quadrature-normalised powered density
        let z = integrate(
            |x| (0.5 * p.log_density(&[x]).unwrap()).exp(),
            &[-50.0, -10.0, 0.0, 10.0, 50.0],
            1e-14,
            0.0,
        );
        let expected = (0.5 * p.log_density(&[10.0]).unwrap()).exp() / z;
        let got = p.log_modified_prior_density(0.5, &[10.0]).unwrap().exp();
        assert_relative_eq!(got, expected, max_relative = 1e-8);
    }

    #[test]
    fn modified_prior_normalises_in_2d() {
        let p = PriorSpec::truncated_gaussian(vec![0.0, 2.0], vec![4.0, 2.0], vec![-50.0, -50.0], vec![50.0, 50.0])
            .unwrap();
        for &beta in &[0.0, 0.05, 0.5, 1.0] {
            // split the grid so the narrow β=1 peak is resolved
            let f = |x: f64, y: f64| p.log_modified_prior_density(beta, &[x, y]).unwrap().exp();
            let mut total = 0.0;
            let cuts = [-50.0, -20.0, 20.0, 50.0];
            for i in 0..3 {
                for j in 0..3 {
                    total += simpson_2d(f, (cuts[i], cuts[i + 1]), (cuts[j], cuts[j + 1]), 400);
                }
            }
            assert!((total - 1.0).abs() < 1e-6, "beta={beta} total={total}");
        }
    }

    #[test]
    fn prior_evolution_curves() {
        let p = paper_prior();
        assert!(matches!(
            PriorSpec::symmetric(2, 0.0, 4.0)
                .unwrap()
                .emit_prior_evolution(&[1.0], &[0.0]),
            Err(Error::Unsupported(_))
        ));
        let grid: Vec<f64> = (0..=2000).map(|i| -50.0 + 0.05 * i as f64).collect();
        let betas = [1.0, 0.5, 0.25, 0.01, 0.0];
        let rows = p.emit_prior_evolution(&betas, &grid).unwrap();
        assert_eq!(rows.len(), betas.len() * grid.len());
        let mut peaks = Vec::new();
        for (i, &beta) in betas.iter().enumerate() {
            let slice = &rows[i * grid.len()..(i + 1) * grid.len()];
            let trapz: f64 = slice
                .windows(2)
                .map(|w| 0.5 * (w[0].density + w[1].density) * 0.05)
                .sum();
            assert!((trapz - 1.0).abs() < 1e-3, "beta={beta} integral={trapz}");
            peaks.push(slice.iter().map(|r| r.density).fold(0.0, f64::max));
            if beta == 0.0 {
                assert!(slice.iter().all(|r| (r.density - 0.01).abs() < 1e-14));
            }
            if beta == 1.0 {
                assert!(slice
                    .iter()
                    .all(|r| (r.density - p.log_density(&[r.theta]).unwrap().exp()).abs() < 1e-15));
            }
        }
        assert!(peaks.windows(2).all(|w| w[0] > w[1]), "{peaks:?}");
    }

    #[test]
    fn config_roundtrip_and_defaults() {
        let text = r#"{"kind":"truncated-gaussian-diagonal","mean":[0.0],"scale":[4.0]}"#;
        let cfg: PriorConfig = serde_json::from_str(text).unwrap();
        let p = cfg.build().unwrap();
        assert_eq!(p.lower(), &[-50.0]);
        assert_eq!(p.config().build().unwrap().upper(), &[50.0]);
        let bad = r#"{"kind":"uniform-box","lower":[0.0],"upper":[1.0],"sigma":3}"#;
        assert!(serde_json::from_str::<PriorConfig>(bad).is_err());
    }

    proptest! {
        #[test]
        fn transform_is_monotone(u1 in 0.0f64..1.0, du in 1e-6f64..0.5, beta in 0.0f64..1.0) {
            let p = paper_prior();
            let u2 = (u1 + du).min(1.0);
            prop_assume!(u2 > u1);
            let a = p.transform_conditional(beta, &[u1]).unwrap()[0];
            let b = p.transform_conditional(beta, &[u2]).unwrap()[0];
            prop_assert!(b > a, "u {} -> {}, u {} -> {}", u1, a, u2, b);
        }

        #[test]
        fn transform_inverts_marginal_cdf(u in 0.0f64..1.0, beta in 0.0f64..1.0) {
            let p = paper_prior();
            let x = p.transform_conditional(beta, &[u]).unwrap()[0];
            prop_assert!((p.marginal_cdf(0, beta, x).unwrap() - u).abs() < 1e-9);
        }
    }
}
