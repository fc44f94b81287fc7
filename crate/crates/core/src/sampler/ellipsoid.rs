//! Single bounding ellipsoid in the unit hypercube.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `{x : (x - c)ᵀ S⁻¹ (x - c) <= 1}` with `S = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub center: DVector<f64>,
    pub shape: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(center: DVector<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let chol = shape
            .clone()
            .cholesky()
            .ok_or_else(|| Error::invalid("ellipsoid shape must be positive definite"))?
            .l();
        Ok(Self { center, shape, chol })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `(x - c)ᵀ S⁻¹ (x - c)`.
    pub fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        let diff = DVector::from_iterator(self.dim(), x.iter().zip(self.center.iter()).map(|(a, b)| a - b));
        self.chol
            .solve_lower_triangular(&diff)
            .map(|z| z.norm_squared())
            .unwrap_or(f64::INFINITY)
    }

    /// `ln` of the ellipsoid volume.
    pub fn log_volume(&self) -> f64 {
        let d = self.dim() as f64;
        let log_unit_ball = 0.5 * d * std::f64::consts::PI.ln() - ln_gamma(0.5 * d + 1.0);
        log_unit_ball + self.chol.diagonal().iter().map(|x| x.ln()).sum::<f64>()
    }

    /// Copy with volume multiplied by `factor`.
    pub fn enlarged(&self, factor: f64) -> Self {
        let linear_sq = factor.powf(2.0 / self.dim() as f64);
        Self {
            center: self.center.clone(),
            shape: &self.shape * linear_sq,
            chol: &self.chol * linear_sq.sqrt(),
        }
    }

    /// Uniform point inside the ellipsoid (may lie outside the unit cube).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let mut z: DVector<f64> = DVector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(rng)));
        let norm = z.norm();
        let radius = rng.random::<f64>().powf(1.0 / d as f64);
        z *= radius / norm;
        let x = &self.center + &self.chol * z;
        x.iter().copied().collect()
    }
}

/// Ellipsoid centred on the sample mean whose shape is the sample covariance
/// scaled so every point has Mahalanobis² <= 1, then enlarged in volume by
/// `1/efr`. A near-singular covariance gets `ridge · I` added.
pub fn bounding_ellipsoid(points: &[Vec<f64>], efr: f64, ridge: f64) -> Result<Ellipsoid> {
    let d = points.first().map(Vec::len).unwrap_or(0);
    if d == 0 || points.len() < d + 1 {
        return Err(Error::invalid(format!(
            "bounding ellipsoid in {d} dimensions needs at least {} points, got {}",
            d + 1,
            points.len()
        )));
    }
    if !(efr > 0.0 && efr <= 1.0) {
        return Err(Error::invalid("efr must lie in (0, 1]"));
    }
    let n = points.len() as f64;
    let mut center = DVector::zeros(d);
    for p in points {
        Error::check_dim(d, p.len())?;
        for k in 0..d {
            center[k] += p[k];
        }
    }
    center /= n;
    let mut cov = DMatrix::zeros(d, d);
    for p in points {
        for i in 0..d {
            let di = p[i] - center[i];
            for j in 0..=i {
                cov[(i, j)] += di * (p[j] - center[j]);
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[(j, i)] = cov[(i, j)];
        }
    }
    cov /= n - 1.0;

    let near_singular = match cov.clone().cholesky() {
        None => true,
        Some(c) => c.l().diagonal().iter().any(|x| x * x < ridge),
    };
    if near_singular {
        for i in 0..d {
            cov[(i, i)] += ridge;
        }
    }
    let base = Ellipsoid::new(center, cov)?;
    let max_md = points.iter().map(|p| base.mahalanobis_sq(p)).fold(0.0, f64::max);
    let scaled = if max_md > 0.0 {
        base.enlarged(max_md.powf(0.5 * d as f64))
    } else {
        base
    };
    Ok(scaled.enlarged(1.0 / efr))
}

/// One draw from the ellipsoid; `None` unless it lies in the open cube
/// `(0,1)^d`. Faces are excluded: a draw that rounds onto one would map to
/// the support boundary, a point no interior `u` can reach.
pub fn sample_in_ellipsoid<R: Rng + ?Sized>(ellipsoid: &Ellipsoid, rng: &mut R) -> Option<Vec<f64>> {
    let x = ellipsoid.sample(rng);
    x.iter().all(|&v| v > 0.0 && v < 1.0).then_some(x)
}
