//! Small descriptive statistics for aggregating repetitions.

use serde::{Deserialize, Serialize};

/// Arithmetic mean; NaN for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Sample standard deviation (`n - 1`); zero for fewer than two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return if xs.is_empty() { f64::NAN } else { 0.0 };
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + (pos - i as f64) * (sorted[i + 1] - sorted[i])
}

/// Co-moment sums between column 0 (β) and every other column, taken about
/// the sample means. Sums from different runs can be merged, which pools
/// the correlation without mixing run-to-run shifts of the means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSums {
    pub n: usize,
    pub s_bb: f64,
    pub s_tt: Vec<f64>,
    pub s_bt: Vec<f64>,
}

impl CorrelationSums {
    pub fn from_samples(samples: &[Vec<f64>]) -> Self {
        let d = samples.first().map_or(1, Vec::len);
        let n = samples.len();
        let mut means = vec![0.0; d];
        for s in samples {
            for (m, x) in means.iter_mut().zip(s) {
                *m += x / n as f64;
            }
        }
        let mut out = Self {
            n,
            s_bb: 0.0,
            s_tt: vec![0.0; d - 1],
            s_bt: vec![0.0; d - 1],
        };
        for s in samples {
            let db = s[0] - means[0];
            out.s_bb += db * db;
            for k in 1..d {
                let dt = s[k] - means[k];
                out.s_tt[k - 1] += dt * dt;
                out.s_bt[k - 1] += db * dt;
            }
        }
        out
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.s_bb += other.s_bb;
        for (a, b) in self.s_tt.iter_mut().zip(&other.s_tt) {
            *a += b;
        }
        for (a, b) in self.s_bt.iter_mut().zip(&other.s_bt) {
            *a += b;
        }
    }

    /// Pearson correlation of β with each θ_k; zero when either side has no spread.
    pub fn correlations(&self) -> Vec<f64> {
        self.s_bt
            .iter()
            .zip(&self.s_tt)
            .map(|(bt, tt)| {
                let denom = (self.s_bb * tt).sqrt();
                if denom > 0.0 {
                    bt / denom
                } else {
                    0.0
                }
            })
            .collect()
    }
}
