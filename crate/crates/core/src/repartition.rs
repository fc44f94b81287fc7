//! Power posterior repartitioning.
//!
//! The product `L(θ)π(θ)` is rewritten as `L̃(θ,β) π̃(θ|β)` with
//! `π̃ = π^β / Z_π(β)` and `L̃ = L π^(1-β) Z_π(β)`. In auto mode β becomes an
//! extra sampled coordinate with a uniform prior on `[β_lo, β_hi]`, and the
//! evidence the sampler returns must be corrected by the width of the β
//! range that was actually explored.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::LogLikelihood;
use crate::priors::PriorSpec;

/// Serialized as its label: `"standard"`, `"autopr"` or `"fixed-beta:0.25"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Mode {
    Standard,
    FixedBeta(f64),
    AutoPr,
}

impl Mode {
    pub fn is_auto(&self) -> bool {
        matches!(self, Mode::AutoPr)
    }

    /// Label used in tables and file names.
    pub fn label(&self) -> String {
        match self {
            Mode::Standard => "standard".to_string(),
            Mode::FixedBeta(b) => format!("fixed-beta:{b}"),
            Mode::AutoPr => "autopr".to_string(),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl TryFrom<String> for Mode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Mode> for String {
    fn from(mode: Mode) -> String {
        mode.label()
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Mode::Standard),
            "autopr" | "auto-pr" | "auto" => Ok(Mode::AutoPr),
            other => match other.strip_prefix("fixed-beta") {
                Some(rest) => rest
                    .trim_start_matches([':', '=', '-'])
                    .parse::<f64>()
                    .map(Mode::FixedBeta)
                    .map_err(|_| Error::invalid(format!("bad fixed-beta mode `{s}`"))),
                None => Err(Error::invalid(format!("unknown mode `{s}`"))),
            },
        }
    }
}

/// Prior, likelihood and repartitioning mode for one sampler run.
#[derive(Clone)]
pub struct InferenceProblem {
    prior: PriorSpec,
    likelihood: Arc<dyn LogLikelihood>,
    mode: Mode,
    beta_range: (f64, f64),
}

impl fmt::Debug for InferenceProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InferenceProblem")
            .field("prior", &self.prior)
            .field("mode", &self.mode)
            .field("beta_range", &self.beta_range)
            .finish_non_exhaustive()
    }
}

impl InferenceProblem {
    /// The β range defaults to `[beta_min, 1]`, which is `[0, 1]` for
    /// bounded priors.
    pub fn new(prior: PriorSpec, likelihood: Arc<dyn LogLikelihood>, mode: Mode) -> Result<Self> {
        Error::check_dim(prior.dim(), likelihood.dim())?;
        if let Mode::FixedBeta(beta) = mode {
            prior.check_beta(beta)?;
        }
        let beta_range = (prior.beta_min(), 1.0);
        Ok(Self {
            prior,
            likelihood,
            mode,
            beta_range,
        })
    }

    pub fn with_beta_range(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::invalid(format!(
                "beta range [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
            )));
        }
        self.prior.check_beta(lo)?;
        self.beta_range = (lo, hi);
        Ok(self)
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn likelihood(&self) -> &Arc<dyn LogLikelihood> {
        &self.likelihood
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn beta_range(&self) -> (f64, f64) {
        self.beta_range
    }

    /// Physical dimension K.
    pub fn dim(&self) -> usize {
        self.prior.dim()
    }

    /// Unit-cube dimension: K, plus one for β in auto mode.
    pub fn cube_dim(&self) -> usize {
        self.dim() + usize::from(self.mode.is_auto())
    }

    /// Names of the sampled parameters, β first in auto mode.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.cube_dim());
        if self.mode.is_auto() {
            names.push("beta".to_string());
        }
        names.extend((1..=self.dim()).map(|k| format!("theta_{k}")));
        names
    }

    /// `ln L̃(θ,β) = ln L(θ) + (1-β) ln π(θ) + ln Z_π(β)`.
    pub fn log_effective_likelihood(&self, theta: &[f64], beta: f64) -> Result<f64> {
        Error::check_dim(self.dim(), theta.len())?;
        self.prior.check_beta(beta)?;
        Ok(self.log_effective_likelihood_unchecked(theta, beta))
    }

    fn log_effective_likelihood_unchecked(&self, theta: &[f64], beta: f64) -> f64 {
        if !self.prior.in_support(theta) {
            return f64::NEG_INFINITY;
        }
        let log_like = self.likelihood.log_likelihood(theta);
        if beta == 1.0 {
            return log_like;
        }
        let log_prior = self.prior.log_density_unchecked(theta);
        if log_prior == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        log_like + (1.0 - beta) * log_prior + self.prior.log_power_norm_unchecked(beta)
    }

    fn fixed_beta(&self) -> f64 {
        match self.mode {
            Mode::Standard | Mode::AutoPr => 1.0,
            Mode::FixedBeta(b) => b,
        }
    }

    /// Map a cube point to `(β, θ)`. In auto mode coordinate 0 is mapped
    /// affinely onto the β range; the rest go through the conditional prior
    /// transform at that β.
    pub fn joint_transform(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        Error::check_dim(self.cube_dim(), u.len())?;
        if let Some(k) = u.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::invalid(format!("u[{k}] = {} outside [0, 1]", u[k])));
        }
        let mut theta = vec![0.0; self.dim()];
        let beta = self.transform_into(u, &mut theta);
        Ok((beta, theta))
    }

    fn transform_into(&self, u: &[f64], theta: &mut [f64]) -> f64 {
        if self.mode.is_auto() {
            let (lo, hi) = self.beta_range;
            let beta = (lo + u[0] * (hi - lo)).clamp(lo, hi);
            self.prior.transform_into(beta, &u[1..], theta);
            beta
        } else {
            let beta = self.fixed_beta();
            self.prior.transform_into(beta, u, theta);
            beta
        }
    }

    /// Sampler entry point: cube point to (parameters, `ln L̃`). Parameters
    /// are `(β, θ)` in auto mode and `θ` otherwise. `u` must already lie in
    /// the unit cube.
    pub fn evaluate(&self, u: &[f64]) -> (Vec<f64>, f64) {
        let mut params = vec![0.0; self.cube_dim()];
        let offset = usize::from(self.mode.is_auto());
        let beta = self.transform_into(u, &mut params[offset..]);
        if offset == 1 {
            params[0] = beta;
        }
        let log_like = self.log_effective_likelihood_unchecked(&params[offset..], beta);
        (params, log_like)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaBoundsMethod {
    #[default]
    SampleExtrema,
    Percentile {
        lo: f64,
        hi: f64,
    },
}

impl BetaBoundsMethod {
    pub fn percentile_default() -> Self {
        BetaBoundsMethod::Percentile { lo: 0.01, hi: 0.99 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBounds {
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub method: BetaBoundsMethod,
}

/// Linear-interpolation empirical quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    }
}

/// β₋ and β₊ from equally weighted β samples.
pub fn beta_bounds(samples: &[f64], method: BetaBoundsMethod) -> Result<BetaBounds> {
    if samples.is_empty() {
        return Err(Error::invalid("no beta samples"));
    }
    if samples.iter().any(|b| !b.is_finite()) {
        return Err(Error::invalid("non-finite beta sample"));
    }
    let (beta_minus, beta_plus) = match method {
        BetaBoundsMethod::SampleExtrema => (
            samples.iter().copied().fold(f64::INFINITY, f64::min),
            samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ),
        BetaBoundsMethod::Percentile { lo, hi } => {
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(Error::invalid("percentiles must satisfy 0 <= lo < hi <= 1"));
            }
            let mut sorted = samples.to_vec();
            sorted.sort_by(f64::total_cmp);
            (quantile_sorted(&sorted, lo), quantile_sorted(&sorted, hi))
        }
    };
    Ok(BetaBounds {
        beta_minus,
        beta_plus,
        method,
    })
}

/// `ln Z = ln Z_eff - ln((β₊ - β₋) / (β_hi - β_lo))`.
pub fn corrected_log_evidence(log_z_eff: f64, bounds: &BetaBounds, beta_range: (f64, f64)) -> Result<f64> {
    let width = bounds.beta_plus - bounds.beta_minus;
    if !(width > 0.0) {
        return Err(Error::DegenerateBounds {
            beta: bounds.beta_plus,
            log_z_eff,
        });
    }
    let range = beta_range.1 - beta_range.0;
    if !(range > 0.0) {
        return Err(Error::invalid("empty beta prior range"));
    }
    Ok(log_z_eff - (width / range).ln())
}
