//! Numerical integration used by the ground-truth evidence oracles.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 5000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive 15-point Gauss–Kronrod integration of `f` over the
/// partition given by `breaks` (sorted, at least two points).
///
/// Refinement stops once the summed error estimate is below
/// `rel_tol * |integral|` or `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64, abs_tol: f64) -> f64 {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut segments: Vec<Segment> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gauss_kronrod(&f, w[0], w[1]))
        .collect();
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= abs_tol.max(rel_tol * total.abs()) || segments.len() >= MAX_INTERVALS {
            return total;
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segments.push(gauss_kronrod(&f, s.a, mid));
        segments.push(gauss_kronrod(&f, mid, s.b));
    }
}

/// `ln ∫ exp(log_f)` over `[a, b]`, with extra break points at `focus`
/// (locations where the integrand is sharply peaked).
pub fn log_integrate<F: Fn(f64) -> f64>(log_f: F, a: f64, b: f64, focus: &[f64], rel_tol: f64) -> f64 {
    let mut breaks = vec![a, b];
    breaks.extend(focus.iter().copied().filter(|&x| x > a && x < b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let shift = breaks.iter().map(|&x| log_f(x)).fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return shift;
    }
    let value = integrate(|x| (log_f(x) - shift).exp(), &breaks, rel_tol, 0.0);
    shift + value.ln()
}

/// Composite Simpson rule on an `n × n` tensor grid (`n` even).
pub fn simpson_2d<F: Fn(f64, f64) -> f64>(f: F, x: (f64, f64), y: (f64, f64), n: usize) -> f64 {
    assert!(n >= 2 && n.is_multiple_of(2), "simpson grid must be even");
    let hx = (x.1 - x.0) / n as f64;
    let hy = (y.1 - y.0) / n as f64;
    let weight = |i: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut total = 0.0;
    for i in 0..=n {
        let xi = x.0 + i as f64 * hx;
        let wi = weight(i);
        for j in 0..=n {
            total += wi * weight(j) * f(xi, y.0 + j as f64 * hy);
        }
    }
    total * hx * hy / 9.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, &[-1.0, 2.0], 1e-14, 0.0);
        assert_relative_eq!(v, (64.0 - 1.0) / 6.0 - 9.0, max_relative = 1e-13);
    }

    #[test]
    fn narrow_peak_needs_focus() {
        // unit-mass gaussian of width 0.01 inside a wide box
        let sd: f64 = 0.01;
        let log_f = |x: f64| -0.5 * ((x - 37.3) / sd).powi(2) - (sd * (2.0 * std::f64::consts::PI).sqrt()).ln();
        let v = log_integrate(log_f, -50.0, 50.0, &[37.3 - 0.1, 37.3, 37.3 + 0.1], 1e-12);
        assert!(v.abs() < 1e-10, "{v}");
    }

    #[test]
    fn simpson_2d_gaussian() {
        let f = |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp() / (2.0 * std::f64::consts::PI);
        let v = simpson_2d(f, (-10.0, 10.0), (-10.0, 10.0), 200);
        assert_relative_eq!(v, 1.0, max_relative = 1e-8);
    }
}
