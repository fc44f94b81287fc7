//! Nested sampling with deterministic prior-volume shrinkage
//! `X_i = exp(-i/N_live)` and a single-ellipsoid constrained sampler.

mod ellipsoid;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use ellipsoid::{bounding_ellipsoid, sample_in_ellipsoid, Ellipsoid};

use crate::error::{Error, Result};
use crate::output::{write_csv, Cell};
use crate::repartition::{InferenceProblem, Mode};
use crate::special::{log_add_exp, log_sum_exp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub n_live: usize,
    /// Sampling efficiency; the bounding ellipsoid volume is scaled by `1/efr`.
    pub efr: f64,
    /// Stop once `max L · X_i < tol · Z`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Likelihood evaluations allowed per replacement at each enlargement stage.
    pub max_draw_attempts: usize,
    pub seed: u64,
    pub ridge: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_live: 100,
            efr: 0.8,
            tol: 0.5,
            max_iterations: 1_000_000,
            max_draw_attempts: 5000,
            seed: 0,
            ridge: 1e-12,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_live < 2 {
            return Err(Error::invalid("n_live must be at least 2"));
        }
        if !(self.efr > 0.0 && self.efr <= 1.0) {
            return Err(Error::invalid("efr must lie in (0, 1]"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid("tol must be positive"));
        }
        if self.max_iterations == 0 || self.max_draw_attempts == 0 {
            return Err(Error::invalid("iteration and draw budgets must be positive"));
        }
        if !(self.ridge > 0.0) {
            return Err(Error::invalid("ridge must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LivePoint {
    pub u: Vec<f64>,
    /// `(β, θ)` in auto mode, `θ` otherwise.
    pub params: Vec<f64>,
    /// `ln L̃`.
    pub log_like: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeadPoint {
    pub iteration: usize,
    pub params: Vec<f64>,
    pub log_like: f64,
    /// `ln w_i`, the prior-volume weight.
    pub log_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// `max L · X_i < tol · Z`.
    Converged,
    /// Every live point has the same likelihood, so the remaining integral
    /// is exactly `L · X_i`.
    Plateau,
    /// No replacement found within the draw budget.
    Stalled,
    MaxIterations,
}

impl Termination {
    pub fn is_failure(self) -> bool {
        matches!(self, Termination::Stalled | Termination::MaxIterations)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub log_z: f64,
    pub log_z_error: f64,
    /// Information `H` in nats.
    pub information: f64,
    pub dead: Vec<DeadPoint>,
    pub final_live: Vec<LivePoint>,
    /// `ln(X_I / N_live)`, the weight of each final live point.
    pub final_live_log_weight: f64,
    /// Importance weights `ln p_i`, dead points first then final live points.
    pub log_importance: Vec<f64>,
    pub n_like: usize,
    pub n_iter: usize,
    pub n_live: usize,
    pub termination: Termination,
    pub param_names: Vec<String>,
    pub mode: Mode,
    pub beta_range: (f64, f64),
}

impl RunResult {
    fn finalize(
        problem: &InferenceProblem,
        config: &SamplerConfig,
        dead: Vec<DeadPoint>,
        live: Vec<LivePoint>,
        n_like: usize,
        termination: Termination,
    ) -> Self {
        let n_iter = dead.len();
        let final_live_log_weight = -(n_iter as f64) / config.n_live as f64 - (config.n_live as f64).ln();
        let mut terms: Vec<f64> = dead.iter().map(|d| d.log_like + d.log_weight).collect();
        terms.extend(live.iter().map(|p| p.log_like + final_live_log_weight));
        let log_z = log_sum_exp(&terms);
        let log_importance: Vec<f64> = terms.iter().map(|t| t - log_z).collect();
        let log_likes: Vec<f64> = dead
            .iter()
            .map(|d| d.log_like)
            .chain(live.iter().map(|p| p.log_like))
            .collect();
        let information = information(&log_likes, &log_importance, log_z);
        Self {
            log_z,
            log_z_error: (information / config.n_live as f64).sqrt(),
            information,
            dead,
            final_live: live,
            final_live_log_weight,
            log_importance,
            n_like,
            n_iter,
            n_live: config.n_live,
            termination,
            param_names: problem.param_names(),
            mode: problem.mode(),
            beta_range: problem.beta_range(),
        }
    }

    /// Parameters of every weighted sample: dead points then final live points.
    pub fn sample_params(&self) -> impl Iterator<Item = &[f64]> {
        self.dead
            .iter()
            .map(|d| d.params.as_slice())
            .chain(self.final_live.iter().map(|p| p.params.as_slice()))
    }

    pub fn importance_weights(&self) -> Vec<f64> {
        self.log_importance.iter().map(|l| l.exp()).collect()
    }

    /// Kish effective sample size `1 / Σ p_i²`.
    pub fn effective_sample_size(&self) -> f64 {
        let doubled: Vec<f64> = self.log_importance.iter().map(|l| 2.0 * l).collect();
        (-log_sum_exp(&doubled)).exp()
    }

    /// Importance-weighted mean of every parameter.
    pub fn posterior_mean(&self) -> Vec<f64> {
        let d = self.param_names.len();
        let mut mean = vec![0.0; d];
        for (params, w) in self.sample_params().zip(self.importance_weights()) {
            for k in 0..d {
                mean[k] += w * params[k];
            }
        }
        mean
    }

    /// `√(H / N_live)`.
    pub fn log_z_error(&self) -> f64 {
        self.log_z_error
    }

    /// Systematic resampling proportional to the importance weights.
    pub fn equal_weight_samples<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        let params: Vec<&[f64]> = self.sample_params().collect();
        let picks = systematic_resample(&self.importance_weights(), count, rng)?;
        Ok(picks.into_iter().map(|i| params[i].to_vec()).collect())
    }

    /// Writes `dead_points.csv`: iteration, log_like, log_weight, parameters.
    pub fn write_dead_points(&self, path: &Path) -> Result<()> {
        let mut header = vec![
            "iteration".to_string(),
            "log_like".to_string(),
            "log_weight".to_string(),
        ];
        header.extend(self.param_names.iter().cloned());
        let rows: Vec<Vec<Cell>> = self
            .dead
            .iter()
            .map(|d| {
                let mut row = vec![
                    Cell::from(d.iteration),
                    Cell::from(d.log_like),
                    Cell::from(d.log_weight),
                ];
                row.extend(d.params.iter().map(|&x| Cell::from(x)));
                row
            })
            .collect();
        write_csv(path, &header, &rows)
    }
}

/// `H = Σ p_i (ln L_i - ln Z)`, skipping zero-weight terms.
pub fn information(log_likes: &[f64], log_importance: &[f64], log_z: f64) -> f64 {
    let h: f64 = log_likes
        .iter()
        .zip(log_importance)
        .filter(|(l, p)| l.is_finite() && p.is_finite())
        .map(|(l, p)| p.exp() * (l - log_z))
        .sum();
    h.max(0.0)
}

/// Indices drawn by systematic resampling; `weights` must sum to one.
pub fn systematic_resample<R: Rng + ?Sized>(weights: &[f64], count: usize, rng: &mut R) -> Result<Vec<usize>> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || !((total - 1.0).abs() < 1e-10) || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::Invariant(format!(
            "importance weights sum to {total}, expected 1"
        )));
    }
    let offset: f64 = rng.random::<f64>();
    let mut picks = Vec::with_capacity(count);
    let mut cumulative = weights[0];
    let mut i = 0;
    for j in 0..count {
        let target = (j as f64 + offset) / count as f64 * total;
        while cumulative < target && i + 1 < weights.len() {
            i += 1;
            cumulative += weights[i];
        }
        picks.push(i);
    }
    Ok(picks)
}

/// `ln w_i = ln ½(X_{i-1} - X_{i+1})` with `X_i = exp(-i/N)`.
fn log_trapezoid_weight(i: usize, n_live: usize) -> f64 {
    let n = n_live as f64;
    -std::f64::consts::LN_2 - (i as f64 - 1.0) / n + crate::special::ln_1m_exp(-2.0 / n)
}

/// Index of the lowest log-likelihood; ties go to the lowest index.
fn worst_index(live: &[LivePoint]) -> usize {
    let mut worst = 0;
    for (i, p) in live.iter().enumerate().skip(1) {
        if p.log_like < live[worst].log_like {
            worst = i;
        }
    }
    worst
}

/// Draw a replacement with `ln L̃ > threshold` from the bounding ellipsoid of
/// `live` intersected with the unit cube. On an exhausted budget the volume
/// enlargement doubles, up to three times, before giving up.
pub fn draw_constrained<R: Rng + ?Sized>(
    live: &[LivePoint],
    threshold: f64,
    problem: &InferenceProblem,
    config: &SamplerConfig,
    rng: &mut R,
    n_like: &mut usize,
) -> Result<LivePoint> {
    let points: Vec<Vec<f64>> = live.iter().map(|p| p.u.clone()).collect();
    let base = bounding_ellipsoid(&points, config.efr, config.ridge)?;
    // a stage also ends after this many out-of-cube proposals
    let cube_budget = config.max_draw_attempts.saturating_mul(100);
    for stage in 0..=3 {
        let ellipsoid = if stage == 0 {
            base.clone()
        } else {
            base.enlarged(2f64.powi(stage))
        };
        let mut evaluated = 0;
        let mut rejected = 0;
        while evaluated < config.max_draw_attempts && rejected < cube_budget {
            let Some(u) = sample_in_ellipsoid(&ellipsoid, rng) else {
                rejected += 1;
                continue;
            };
            evaluated += 1;
            *n_like += 1;
            let (params, log_like) = problem.evaluate(&u);
            if log_like > threshold {
                return Ok(LivePoint { u, params, log_like });
            }
        }
    }
    Err(Error::Invariant(format!(
        "no point above log-likelihood {threshold} after {} attempts per stage",
        config.max_draw_attempts
    )))
}

/// Run nested sampling on `problem`.
///
/// A run that cannot find a replacement point or exhausts `max_iterations`
/// returns [`Error::Stalled`] carrying the partial result, finalized with
/// the live points at that moment.
pub fn run(problem: &InferenceProblem, config: &SamplerConfig) -> Result<RunResult> {
    config.validate()?;
    let d = problem.cube_dim();
    if config.n_live < d + 2 {
        return Err(Error::invalid(format!(
            "n_live must be at least {} for {d} dimensions",
            d + 2
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut n_like = 0;
    let mut live: Vec<LivePoint> = (0..config.n_live)
        .map(|_| {
            let u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            n_like += 1;
            let (params, log_like) = problem.evaluate(&u);
            LivePoint { u, params, log_like }
        })
        .collect();

    let ln_tol = config.tol.ln();
    let mut dead: Vec<DeadPoint> = Vec::new();
    let mut log_z = f64::NEG_INFINITY;
    let mut i = 0;
    let termination = loop {
        let max_ll = live.iter().map(|p| p.log_like).fold(f64::NEG_INFINITY, f64::max);
        let min_ll = live.iter().map(|p| p.log_like).fold(f64::INFINITY, f64::min);
        let log_x = -(i as f64) / config.n_live as f64;
        if i > 0 && max_ll + log_x < ln_tol + log_z {
            break Termination::Converged;
        }
        if max_ll == min_ll {
            break Termination::Plateau;
        }
        if i >= config.max_iterations {
            let partial = RunResult::finalize(problem, config, dead, live, n_like, Termination::MaxIterations);
            return Err(Error::Stalled {
                iterations: i,
                reason: "max_iterations reached".into(),
                partial: Box::new(partial),
            });
        }

        i += 1;
        let worst = worst_index(&live);
        let threshold = live[worst].log_like;
        let log_w = log_trapezoid_weight(i, config.n_live);
        log_z = log_add_exp(log_z, threshold + log_w);

        let others: Vec<LivePoint> = live
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != worst)
            .map(|(_, p)| p.clone())
            .collect();
        match draw_constrained(&others, threshold, problem, config, &mut rng, &mut n_like) {
            Ok(replacement) => {
                let removed = std::mem::replace(&mut live[worst], replacement);
                dead.push(DeadPoint {
                    iteration: i,
                    params: removed.params,
                    log_like: removed.log_like,
                    log_weight: log_w,
                });
            }
            Err(err) => {
                // the unreplaced point stays live; only completed iterations are archived
                let partial = RunResult::finalize(problem, config, dead, live, n_like, Termination::Stalled);
                return Err(Error::Stalled {
                    iterations: i - 1,
                    reason: match err {
                        Error::Invariant(msg) => msg,
                        other => other.to_string(),
                    },
                    partial: Box::new(partial),
                });
            }
        }
    };
    Ok(RunResult::finalize(problem, config, dead, live, n_like, termination))
}
