//! Reference values for Brownian motion with generator `Delta / 2` in a planar
//! disk and on a half-line. The horizontal projection of the group Brownian
//! motion is planar Brownian motion, so these are exact references for the
//! vertical cylinder and the half-space.

use statrs::function::erf::erf;
use std::f64::consts::PI;

/// `J_n(x) = (1/pi) int_0^pi cos(n s - x sin s) ds` by the trapezoid rule, which
/// converges geometrically for this periodic integrand once the node count exceeds `|x|`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let m = 2 * ((x.abs() as usize) + 40);
    let h = PI / m as f64;
    let f = |s: f64| (f64::from(n) * s - x * s.sin()).cos();
    let inner: f64 = (1..m).map(|k| f(k as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) / m as f64
}

/// The `k`-th positive zero of `J_0` (`k >= 1`), by Newton from McMahon's estimate.
pub fn bessel_j0_zero(k: usize) -> f64 {
    let b = (k as f64 - 0.25) * PI;
    let mut x = b + 1.0 / (8.0 * b) - 31.0 / (384.0 * b.powi(3));
    for _ in 0..50 {
        let dx = bessel_j(0, x) / bessel_j(1, x);
        x += dx;
        if dx.abs() < 1e-15 * x {
            break;
        }
    }
    x
}

/// Zeros `j_k` needed so that `exp(-j_k^2 t / (2 R^2))` falls below `1e-18`; at least `min_terms`.
fn zeros_for(t: f64, radius: f64, min_terms: usize) -> Vec<f64> {
    let j_max = (2.0 * 42.0 * radius * radius / t).sqrt();
    let n = min_terms.max((j_max / PI).ceil() as usize + 2);
    (1..=n).map(bessel_j0_zero).collect()
}

/// `P(planar BM started at distance rho from the centre stays in the disk of radius R up to t)`.
pub fn disk_survival(rho: f64, t: f64, radius: f64) -> f64 {
    zeros_for(t, radius, 50)
        .iter()
        .map(|&j| 2.0 / (j * bessel_j(1, j)) * bessel_j(0, j * rho / radius) * (-j * j * t / (2.0 * radius * radius)).exp())
        .sum()
}

/// `int_disk P_x(survive to t) dx = sum_k 4 pi R^2 / j_k^2 exp(-j_k^2 t / (2 R^2))`.
pub fn disk_heat_content(t: f64, radius: f64) -> f64 {
    zeros_for(t, radius, 50).iter().map(|&j| 4.0 * PI * radius * radius / (j * j) * (-j * j * t / (2.0 * radius * radius)).exp()).sum()
}

/// Small-time expansion of the planar disk heat content for generator `Delta / 2`:
/// `pi R^2 - sqrt(2t/pi) 2 pi R + (t/4) 2 pi`.
pub fn disk_heat_content_expansion(t: f64, radius: f64) -> f64 {
    PI * radius * radius - (2.0 * t / PI).sqrt() * 2.0 * PI * radius + 0.25 * t * 2.0 * PI
}

/// `P(max_{[0,t]} B < d)` for a standard Brownian motion, `d >= 0`.
pub fn half_line_survival(d: f64, t: f64) -> f64 {
    erf(d / (2.0 * t).sqrt())
}
