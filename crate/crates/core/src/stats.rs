//! Small statistical helpers: order-insensitive sums, goodness-of-fit tests and
//! log-log slope regression.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pairwise (cascade) summation; the result depends only on the slice order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Sample mean and its standard error.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = pairwise_sum(v) / n;
    let dev: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs());
    }
    d
}

pub fn half_normal_cdf(x: f64, t: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        statrs::function::erf::erf(x / (2.0 * t).sqrt())
    }
}

/// CDF of the arcsine law on `[0, t]`.
pub fn arcsine_cdf(x: f64, t: f64) -> f64 {
    let u = (x / t).clamp(0.0, 1.0);
    2.0 / std::f64::consts::PI * u.sqrt().asin()
}

/// Pearson chi-square statistic and p-value with `df = cells - 1 - fitted`.
/// Cells with zero expectation are skipped.
pub fn chi_square(observed: &[f64], expected: &[f64], fitted: usize) -> (f64, f64) {
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (o, e) in observed.iter().zip(expected) {
        if *e > 0.0 {
            stat += (o - e) * (o - e) / e;
            cells += 1;
        }
    }
    let df = (cells.saturating_sub(1 + fitted)).max(1) as f64;
    let p = ChiSquared::new(df).map(|d| 1.0 - d.cdf(stat)).unwrap_or(f64::NAN);
    (stat, p)
}

/// Least-squares slope of `log y` against `log x` and its standard error.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let se = if n > 2.0 { (resid / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, se)
}

/// 4-point Gauss-Legendre rule on `[-1, 1]`.
pub const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Composite 4-point Gauss-Legendre quadrature of `f` on `[a, b]` with `panels`
/// equal panels. Endpoints are never evaluated.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let w = (b - a) / panels as f64;
    let terms: Vec<f64> = (0..panels)
        .flat_map(|k| {
            let mid = a + (k as f64 + 0.5) * w;
            GL4.iter().map(move |&(u, g)| (mid + 0.5 * w * u, 0.5 * w * g))
        })
        .map(|(x, g)| g * f(x))
        .collect();
    pairwise_sum(&terms)
}
