//! Normal-distribution special functions and log-space arithmetic.
//!
//! Tail probabilities are kept in log space so that truncation masses deep
//! in the wings (tens of standard deviations) neither underflow nor cancel.

use statrs::function::erf::{erf, erfc};

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Below this argument `erfc` is replaced by the asymptotic tail series.
const ASYMPTOTIC_CUTOFF: f64 = -35.0;

/// `ln(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ exp(x_i)`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `ln(1 - exp(x))` for `x <= 0`.
pub fn ln_1m_exp(x: f64) -> f64 {
    if x > 0.0 {
        f64::NAN
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Standard normal log-density.
pub fn log_norm_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x * FRAC_1_SQRT_2)
    }
}

/// `ln Φ(x)`, accurate in both tails.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if x > 0.0 {
        return (-0.5 * erfc(x * FRAC_1_SQRT_2)).ln_1p();
    }
    if x > ASYMPTOTIC_CUTOFF {
        return (0.5 * erfc(-x * FRAC_1_SQRT_2)).ln();
    }
    // Mills-ratio series: Φ(x) ≈ φ(x)/|x| · (1 - 1/x² + 3/x⁴ - 15/x⁶ + 105/x⁸)
    let z = 1.0 / (x * x);
    let series = 1.0 - z * (1.0 - z * (3.0 - z * (15.0 - z * 105.0)));
    log_norm_pdf(x) - (-x).ln() + series.ln()
}

/// `ln(1 - Φ(x))`.
pub fn log_norm_sf(x: f64) -> f64 {
    log_norm_cdf(-x)
}

/// `ln P(lo < Z < hi)` for a standard normal `Z`; either bound may be infinite.
pub fn log_norm_interval(lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return f64::NEG_INFINITY;
    }
    if lo >= 0.0 {
        let a = log_norm_sf(lo);
        let b = log_norm_sf(hi);
        a + ln_1m_exp(b - a)
    } else if hi <= 0.0 {
        let a = log_norm_cdf(hi);
        let b = log_norm_cdf(lo);
        a + ln_1m_exp(b - a)
    } else {
        let upper = if hi.is_infinite() { 1.0 } else { erf(hi * FRAC_1_SQRT_2) };
        let lower = if lo.is_infinite() {
            -1.0
        } else {
            erf(lo * FRAC_1_SQRT_2)
        };
        (0.5 * (upper - lower)).ln()
    }
}

const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

/// Rational approximation to Φ⁻¹ (relative error ≈ 1e-9) taking `ln p` for a
/// lower-tail probability `p <= 0.5`.
fn rational_ppf_lower(log_p: f64) -> f64 {
    let p = log_p.exp();
    if p >= P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * log_p).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Inverse standard normal CDF from a log lower-tail probability.
///
/// Lower-tail probabilities far below the smallest positive `f64` are fine.
pub fn norm_ppf_log(log_p: f64) -> f64 {
    if log_p <= -std::f64::consts::LN_2 {
        return lower_tail_ppf(log_p);
    }
    if log_p >= 0.0 {
        return f64::INFINITY;
    }
    -lower_tail_ppf(ln_1m_exp(log_p))
}

/// Quantile for `ln p <= ln ½`: rational start plus one Newton step on `ln Φ`.
fn lower_tail_ppf(log_p: f64) -> f64 {
    if log_p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let x = rational_ppf_lower(log_p);
    let log_cdf = log_norm_cdf(x);
    // d/dx ln Φ(x) = φ(x)/Φ(x)
    let slope = (log_norm_pdf(x) - log_cdf).exp();
    x - (log_cdf - log_p) / slope
}

/// Inverse standard normal CDF for `p` in `[0, 1]`.
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p <= 0.5 {
        lower_tail_ppf(p.ln())
    } else {
        -lower_tail_ppf((1.0 - p).ln())
    }
}

/// Quantile `u` of a standard normal truncated to `[lo, hi]`.
///
/// Works from whichever tail keeps the target probability below one half, so
/// bounds many standard deviations out in either wing keep full precision.
pub fn truncated_norm_ppf(lo: f64, hi: f64, u: f64) -> f64 {
    let log_mass = log_norm_interval(lo, hi);
    let log_below = log_add_exp(log_norm_cdf(lo), u.ln() + log_mass);
    let x = if log_below <= -std::f64::consts::LN_2 {
        norm_ppf_log(log_below)
    } else {
        let log_above = log_add_exp(log_norm_sf(hi), (1.0 - u).ln() + log_mass);
        -norm_ppf_log(log_above.min(-std::f64::consts::LN_2))
    };
    x.clamp(lo, hi)
}

/// CDF at `x` of a standard normal truncated to `[lo, hi]`.
pub fn truncated_norm_cdf(lo: f64, hi: f64, x: f64) -> f64 {
    if x <= lo {
        return 0.0;
    }
    if x >= hi {
        return 1.0;
    }
    (log_norm_interval(lo, x) - log_norm_interval(lo, hi)).exp()
}
