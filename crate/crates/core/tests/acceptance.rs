//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure.
//!
//! `cargo test --test acceptance -- 3 5` runs a subset. With
//! `HHEAT_ACCEPTANCE_SMOKE=1` the coefficient-recovery and decomposition runs
//! use the reduced path counts and tolerances.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use hheat::cli::validate::{fd_chart_det, fd_frame_bracket};
use hheat::domain::{Cylinder, EuclideanBall};
use hheat::driver::{bridge_max_stats, max_stats, sample_driver, sample_max_argmax, PathConfig};
use hheat::heatmc::{
    build_shell, decompose_events, estimate_heat_content, estimate_survival_grid, fit_expansion, predicted_coefficients, ShellEps, ShellOptions,
    SimConfig,
};
use hheat::hgroup::HPoint;
use hheat::rng::{stream, Purpose};
use hheat::stats::{arcsine_cdf, chi_square, gauss_legendre, half_normal_cdf, ks_statistic, loglog_slope, mean_se};
use hheat::surfgeom::{g1_normal, horizontal_mean_curvature, SurfacePoint, SurfaceQuadrature};
use hheat::tubechart::{h_expansion, phi_jacobian_det, tube_jacobian, ChartCoords, GeodesicChart};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

fn smoke() -> bool {
    std::env::var("HHEAT_ACCEPTANCE_SMOKE").is_ok_and(|v| !v.is_empty() && v != "0")
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "chart exactness", chart_exactness),
        (2, "frame brackets", frame_brackets),
        (3, "joint law of (max, argmax)", max_argmax_law),
        (4, "moments at the argmax", argmax_moments),
        (5, "cylinder survival vs disk Bessel series", cylinder_survival),
        (6, "coefficient recovery", coefficient_recovery),
        (7, "boundary graph expansion", graph_expansion),
        (8, "tube Jacobian bound", tube_jacobian_bound),
        (9, "decomposition diagnostics", decomposition),
        (10, "reproducibility across workers", reproducibility),
    ];
    let mut failed = 0;
    for (k, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {k:>2} {} {name}: {} ({secs:.1} s)", if out.passed { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.passed);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn random_chart(r: &mut impl Rng) -> GeodesicChart {
    let base = HPoint::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
    GeodesicChart::new(base, r.random_range(-PI..PI), r.random_range(-3.0..3.0), r.random_range(0.0..0.3))
}

fn random_coords(r: &mut impl Rng, ch: &GeodesicChart) -> ChartCoords {
    let b = ch.domain_box;
    ChartCoords::new(r.random_range(-b.xi..b.xi), r.random_range(-b.y..b.y), r.random_range(-b.z..b.z))
}

fn chart_exactness() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let (mut flow_err, mut det_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let ch = random_chart(&mut r);
        let c = random_coords(&mut r, &ch);
        flow_err = flow_err.max(ch.phi_unchecked(&c).euclid_dist(&ch.flow_rk4(&ch.base, &c, 400)));
        let exact = phi_jacobian_det(ch.lambda, c.y);
        det_err = det_err.max((fd_chart_det(&ch, &c, 1e-5) - exact).abs() / exact);
    }
    Outcome::new(flow_err <= 1e-8 && det_err <= 1e-6, format!("phi vs RK4 max {flow_err:.2e} (tol 1e-8), det vs FD max rel {det_err:.2e} (tol 1e-6)"))
}

fn ball() -> EuclideanBall {
    EuclideanBall { center: HPoint::new(0.1, -0.2, 0.05), radius: 1.0 }
}

fn ball_point(b: &EuclideanBall, polar: f64, azimuth: f64) -> SurfacePoint {
    let c = b.center;
    let p = HPoint::new(c.x1 + b.radius * polar.sin() * azimuth.cos(), c.x2 + b.radius * polar.sin() * azimuth.sin(), c.x3 + b.radius * polar.cos());
    g1_normal(b, &p).expect("noncharacteristic ball point")
}

/// `[N,T] = -2Z`, `[N,Z] = 0`, `[T,Z] = -2 lambda Z` with `lambda = 2 n3 / |n_h|`
/// at the boundary point the chart is built from.
fn frame_brackets() -> Outcome {
    let b = ball();
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let mut err: f64 = 0.0;
    for _ in 0..100 {
        let s = ball_point(&b, r.random_range(0.5..PI - 0.5), r.random_range(-PI..PI));
        let lambda = 2.0 * s.n.c / s.nh_norm;
        let ch = GeodesicChart::from_boundary(&b, &s, r.random_range(0.0..0.2)).expect("chart");
        let q = ch.phi_unchecked(&random_coords(&mut r, &ch));
        let z = ch.frame_fields(&q).z.to_cartesian(&q);
        let h = 1e-5;
        let (nt, nz, tz) = (fd_frame_bracket(&ch, &q, 0, 1, h), fd_frame_bracket(&ch, &q, 0, 2, h), fd_frame_bracket(&ch, &q, 1, 2, h));
        for k in 0..3 {
            err = err.max((nt[k] + 2.0 * z[k]).abs()).max(nz[k].abs()).max((tz[k] + 2.0 * lambda * z[k]).abs());
        }
    }
    Outcome::new(err <= 1e-5, format!("max FD commutator error {err:.2e} over 100 points (tol 1e-5)"))
}

/// Probabilities of the 10 x 10 cells of equal half-normal and arcsine mass
/// under the joint law, which is arcsine in `tau` times Rayleigh(`sqrt(tau)`) in `xi`.
fn joint_cells(t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let nrm = Normal::new(0.0, 1.0).unwrap();
    let xi_edges: Vec<f64> = (0..=10).map(|i| if i == 10 { f64::INFINITY } else { t.sqrt() * nrm.inverse_cdf(0.5 + 0.05 * i as f64) }).collect();
    let th_edges: Vec<f64> = (0..=10).map(|i| FRAC_PI_2 * i as f64 / 10.0).collect();
    let tau_edges: Vec<f64> = th_edges.iter().map(|th| t * th.sin().powi(2)).collect();
    let mut probs = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            let (a, b) = (xi_edges[j], xi_edges[j + 1]);
            let cell = gauss_legendre(
                |th| {
                    let tau = t * th.sin().powi(2);
                    (-a * a / (2.0 * tau)).exp() - (-b * b / (2.0 * tau)).exp()
                },
                th_edges[i],
                th_edges[i + 1],
                64,
            );
            probs.push(2.0 / PI * cell);
        }
    }
    (probs, xi_edges, tau_edges)
}

fn bin(x: f64, edges: &[f64]) -> usize {
    edges[1..].iter().position(|&e| x < e).unwrap_or(edges.len() - 2)
}

fn law_tests(xi: &[f64], tau: &[f64], t: f64) -> (f64, f64, f64) {
    let ks_tau = ks_statistic(tau, |x| arcsine_cdf(x, t));
    let ks_xi = ks_statistic(xi, |x| half_normal_cdf(x, t));
    let (probs, xe, te) = joint_cells(t);
    let mut obs = vec![0.0; 100];
    for (x, s) in xi.iter().zip(tau) {
        obs[10 * bin(*s, &te) + bin(*x, &xe)] += 1.0;
    }
    let n = xi.len() as f64;
    let exp: Vec<f64> = probs.iter().map(|p| p * n).collect();
    (ks_tau, ks_xi, chi_square(&obs, &exp, 0).1)
}

/// The law is tested on the maximum of the Brownian interpolation of each
/// discretized path. The raw grid maximum sits about `0.58 sqrt(dt)` below the
/// continuous one; its statistics are reported alongside.
fn max_argmax_law() -> Outcome {
    let t = 1.0;
    let n = 100_000u64;
    let (grid, bridge): (Vec<(f64, f64)>, Vec<(f64, f64)>) = (0..n)
        .into_par_iter()
        .map(|i| {
            let path = sample_driver(&PathConfig::new(t, 4096, 1, 3, i).unwrap());
            let g = max_stats(&path);
            let b = bridge_max_stats(&path, &mut stream(3, Purpose::Auxiliary(1), i));
            ((g.xi, g.tau), (b.xi, b.tau))
        })
        .unzip();
    let split = |v: Vec<(f64, f64)>| -> (Vec<f64>, Vec<f64>) { v.into_iter().unzip() };
    let ((gxi, gtau), (bxi, btau)) = (split(grid), split(bridge));
    let (gkt, gkx, gp) = law_tests(&gxi, &gtau, t);
    let (kt, kx, p) = law_tests(&bxi, &btau, t);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (exi, etau): (Vec<f64>, Vec<f64>) = (0..n).map(|_| sample_max_argmax(&mut rng, t)).unzip();
    let (ekt, ekx, ep) = law_tests(&exi, &etau, t);
    Outcome::new(
        kt <= 0.015 && kx <= 0.01 && p > 0.001 && ekt <= 0.005 && ekx <= 0.005 && ep > 0.001,
        format!(
            "paths: KS tau {kt:.4} (<= 0.015), KS xi {kx:.4} (<= 0.01), chi2 p {p:.3}; exact sampler: KS tau {ekt:.4}, KS xi {ekx:.4} (<= 0.005), chi2 p {ep:.3}; raw grid max: KS tau {gkt:.4}, KS xi {gkx:.4}, chi2 p {gp:.3}"
        ),
    )
}

fn argmax_moments() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    // distinct seeds: by Brownian scaling one stream would give identical z-scores at both times
    for (t, seed) in [(0.25, 41), (1.0, 42)] {
        let (bt2, a): (Vec<f64>, Vec<f64>) = (0..100_000u64)
            .into_par_iter()
            .map(|i| {
                let m = max_stats(&sample_driver(&PathConfig::new(t, 1024, 4, seed, i).unwrap()));
                (m.bt_at_tau * m.bt_at_tau, m.a_at_tau)
            })
            .unzip();
        let ((m2, s2), (ma, sa)) = (mean_se(&bt2), mean_se(&a));
        let (z2, za) = ((m2 - t / 2.0) / s2, ma / sa);
        ok &= z2.abs() <= 3.0 && za.abs() <= 3.0;
        parts.push(format!("t={t}: E[BT^2] z={z2:.2}, E[A] z={za:.2}"));
    }
    Outcome::new(ok, parts.join("; "))
}

/// `J_n(x) = (1/pi) int_0^pi cos(n s - x sin s) ds`.
fn bessel(n: f64, x: f64) -> f64 {
    let panels = 16 + (x.abs() as usize) * 2;
    gauss_legendre(|s| (n * s - x * s.sin()).cos(), 0.0, PI, panels) / PI
}

/// Positive zeros of `J0` by Newton from McMahon's approximation.
fn j0_zeros(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| {
            let b = (k as f64 - 0.25) * PI;
            let mut x = b + 1.0 / (8.0 * b);
            for _ in 0..20 {
                x += bessel(0.0, x) / bessel(1.0, x);
            }
            x
        })
        .collect()
}

/// Survival of planar Brownian motion (generator `Delta / 2`) in the unit disk from radius `rho`.
fn disk_survival_oracle(zeros: &[f64], rho: f64, t: f64) -> f64 {
    zeros.iter().map(|&j| 2.0 / (j * bessel(1.0, j)) * bessel(0.0, j * rho) * (-j * j * t / 2.0).exp()).sum()
}

fn disk_heat_content_oracle(zeros: &[f64], t: f64) -> f64 {
    zeros.iter().map(|&j| 4.0 * PI / (j * j) * (-j * j * t / 2.0).exp()).sum()
}

fn cylinder_survival() -> Outcome {
    let cyl = Cylinder::new(1.0, 1.0);
    let zeros = j0_zeros(40);
    let ts = [0.02, 0.05, 0.1];
    let cfg = SimConfig { n_paths: 100_000, n_steps: 256, n_substeps: 8, seed: 5, bridge: true };
    let mut worst: f64 = 0.0;
    for rho in [0.3, 0.6, 0.9] {
        let est = estimate_survival_grid(&cyl, &HPoint::new(rho, 0.0, 0.4), &ts, &cfg).expect("survival");
        for e in est {
            let exact = disk_survival_oracle(&zeros, rho, e.t);
            // near-certain survival can leave no exits at all, so the binomial
            // error of the exact probability bounds the estimated one from below
            let se = e.std_err.max((exact * (1.0 - exact) / e.n_paths as f64).sqrt());
            worst = worst.max((e.p_hat - exact).abs() / se);
        }
    }
    Outcome::new(worst <= 3.0, format!("max |z| {worst:.2} over 3 radii x 3 times (<= 3)"))
}

fn coefficient_recovery() -> Outcome {
    let (paths, c1_tol, c2_tol) = if smoke() { (10_000, 0.10, 0.40) } else { (100_000, 0.03, 0.15) };
    let cyl = Cylinder::new(1.0, 1.0);
    let ts = [0.0025, 0.005, 0.01, 0.02, 0.04];
    let cfg = SimConfig { n_paths: paths, n_steps: 256, n_substeps: 8, seed: 6, bridge: true };
    let est = estimate_heat_content(&cyl, &ts, ShellEps::Auto, &cfg).expect("heat content");
    let fit = fit_expansion(&est).expect("fit");
    let se = fit.std_errs();
    let pred = predicted_coefficients(&cyl, &SurfaceQuadrature::build(&cyl, 3).unwrap()).unwrap();

    // Euclidean unit disk: |D| - sqrt(2t/pi) |dD| + (t/4) int kappa
    let eucl = [PI, (2.0 / PI).sqrt() * 2.0 * PI, 0.25 * 2.0 * PI];
    let z: Vec<f64> = (0..3).map(|i| (fit.coefficients()[i] - eucl[i]) / se[i]).collect();
    let rel1 = (fit.c1 / eucl[1] - 1.0).abs();
    let rel2 = (fit.c2 / eucl[2] - 1.0).abs();
    let c0_quad = (pred.c0 - PI).abs() <= 3.0 * pred.c0_err;
    let geom_match = (pred.c1 - eucl[1]).abs() <= 3.0 * pred.c1_err + 1e-9 && (pred.c2 - eucl[2]).abs() <= 3.0 * pred.c2_err + 1e-9;
    let zeros = j0_zeros(120);
    let disk_z = est.iter().map(|e| ((e.q_hat - disk_heat_content_oracle(&zeros, e.t)) / e.std_err).abs()).fold(0.0, f64::max);
    let ok = rel1 <= c1_tol && rel2 <= c2_tol && z.iter().all(|z| z.abs() <= 4.0) && c0_quad && geom_match && disk_z <= 4.0;
    Outcome::new(
        ok,
        format!(
            "{} paths/node, {} nodes: c0 {:.5}+-{:.5}, c1 {:.4}+-{:.4} ({:.2}% off), c2 {:.4}+-{:.4} ({:.1}% off), z {:.2}/{:.2}/{:.2}; predicted c0 {:.6}+-{:.1e}; geometry = disk expansion: {geom_match}; max |z| vs exact disk Q(t) {disk_z:.2}",
            paths, est[0].n_shell_nodes, fit.c0, se[0], fit.c1, se[1], 100.0 * rel1, fit.c2, se[2], 100.0 * rel2, z[0], z[1], z[2], pred.c0, pred.c0_err
        ),
    )
}

fn graph_expansion() -> Outcome {
    let cyl = Cylinder::new(1.0, 1.0);
    let mut r = ChaCha8Rng::seed_from_u64(7);
    let (mut half_err, mut k1_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let a = r.random_range(-PI..PI);
        let s = g1_normal(&cyl, &HPoint::new(a.cos(), a.sin(), r.random_range(0.0..1.0))).unwrap();
        let h = horizontal_mean_curvature(&cyl, &s).unwrap();
        let ch = GeodesicChart::from_boundary(&cyl, &s, 0.0).unwrap();
        let e = h_expansion(&cyl, &ch).unwrap();
        half_err = half_err.max((e.half_h - 0.5 * h).abs()).max((e.half_h - 0.5).abs());
        k1_err = k1_err.max(e.k1.abs());
    }
    Outcome::new(
        half_err <= 1e-4 && k1_err <= 1e-8,
        format!("max |half_H - H/2| {half_err:.2e} (tol 1e-4), max |k1| {k1_err:.2e} (tol 1e-8) at 50 points"),
    )
}

/// `K1` is fitted as 1.25 x the largest `|J - 1 + H r| / r^2` on `r = 0.02, ..., 0.2`,
/// then the bound is checked at independent random radii.
fn tube_jacobian_bound() -> Outcome {
    let b = ball();
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let mut k1: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..20 {
        let s = ball_point(&b, r.random_range(0.6..PI - 0.6), r.random_range(-PI..PI));
        let h = horizontal_mean_curvature(&b, &s).unwrap();
        let rem = |rad: f64| (tube_jacobian(&b, &s, rad).unwrap() - 1.0 + h * rad).abs();
        let fitted = 1.25 * (1..=10).map(|k| 0.02 * k as f64).map(|x| rem(x) / (x * x)).fold(0.0, f64::max);
        k1 = k1.max(fitted);
        for _ in 0..10 {
            let x = r.random_range(1e-3..0.2);
            worst_ratio = worst_ratio.max(rem(x) / (fitted * x * x));
        }
    }
    let cyl = Cylinder::new(1.0, 1.0);
    let mut cyl_err: f64 = 0.0;
    for k in 0..20 {
        let a = 0.3 * k as f64;
        let s = g1_normal(&cyl, &HPoint::new(a.cos(), a.sin(), 0.05 * k as f64)).unwrap();
        for rad in [0.01, 0.05, 0.1, 0.2, 0.5] {
            // annulus ratio (R - r) / R
            cyl_err = cyl_err.max((tube_jacobian(&cyl, &s, rad).unwrap() - (1.0 - rad)).abs());
        }
    }
    Outcome::new(
        k1.is_finite() && worst_ratio <= 1.0 && cyl_err <= 1e-6,
        format!("fitted K1 {k1:.3}, worst remainder / (K1 r^2) {worst_ratio:.3} (<= 1); cylinder |J - (1 - r)| max {cyl_err:.2e} (tol 1e-6)"),
    )
}

fn decomposition() -> Outcome {
    let paths = if smoke() { 2_000 } else { 10_000 };
    let cyl = Cylinder::new(1.0, 1.0);
    let ts = [0.0025, 0.005, 0.01, 0.02, 0.04];
    let quad = SurfaceQuadrature::build(&cyl, 3).unwrap();
    let layout = build_shell(&cyl, &quad, ShellEps::Auto, 0.04, &ShellOptions::for_times(&ts)).unwrap();
    let cfg = SimConfig { n_paths: paths, n_steps: 256, n_substeps: 2, seed: 9, bridge: false };
    let mut worst_z: f64 = 0.0;
    let mut rows = Vec::new();
    for &t in &ts {
        let d = decompose_events(&cyl, &layout, t, &cfg, None).unwrap();
        let rhs = d.q_prime + d.residual_tau_t + d.residual_t_tau_in;
        let se = [d.se_i1, d.se_i2, d.se_i3, d.se_q_prime, d.se_r1, d.se_r2].iter().map(|s| s * s).sum::<f64>().sqrt();
        worst_z = worst_z.max((d.e_total() - rhs).abs() / se);
        rows.push(d);
    }
    let slope = |f: fn(&hheat::heatmc::EventDecomposition) -> f64| {
        loglog_slope(&rows.iter().map(|d| d.t).collect::<Vec<_>>(), &rows.iter().map(f).collect::<Vec<_>>())
    };
    let (s1, s2) = (slope(|d| d.residual_tau_t), slope(|d| d.residual_t_tau_in));
    Outcome::new(
        worst_z <= 3.0 && s1.0 >= 1.2 && s2.0 >= 1.2,
        format!(
            "{paths} paths/node: max |I1 - I2 + I3 - (Q' + res)| / se {worst_z:.2} (<= 3); slopes res(tau<T'<=t) {:.2}+-{:.2}, res(T'<=tau, in) {:.2}+-{:.2} (>= 1.2)",
            s1.0, s1.1, s2.0, s2.1
        ),
    )
}

fn run_cli(out: &Path, threads: &str, args: &[&str]) -> Option<i32> {
    Command::new(env!("CARGO_BIN_EXE_hheat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("HHEAT_THREADS", threads)
        .output()
        .expect("binary runs")
        .status
        .code()
}

/// CSV bytes, with the timing column of the heat CSV removed.
fn csv_bytes(dir: &Path, name: &str) -> Vec<u8> {
    let text = std::fs::read_to_string(dir.join(name)).unwrap_or_default();
    if name == "heat.csv" {
        text.lines().map(|l| l.rsplit_once(',').map_or(l, |p| p.0).to_string() + "\n").collect::<String>().into_bytes()
    } else {
        text.into_bytes()
    }
}

fn reproducibility() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let runs: [(&str, Vec<&str>, &[&str]); 5] = [
        ("geom", vec!["geom"], &["geom.csv", "characteristic_points.csv"]),
        ("heat", vec!["heat", "--paths", "1000", "--steps", "64", "--tgrid", "0.0025,0.005,0.01,0.02,0.04", "--seed", "11"], &["heat.csv"]),
        ("fit", vec!["fit"], &["fit.csv"]),
        ("diag", vec!["diag", "--paths", "300", "--steps", "64", "--tgrid", "0.01,0.02", "--seed", "11"], &["diag.csv"]),
        ("validate", vec!["validate", "--seed", "11"], &["validate.csv"]),
    ];
    let mut mismatches = Vec::new();
    for (name, args, files) in &runs {
        let dirs = [root.path().join("w1"), root.path().join("w8")];
        let mut codes = Vec::new();
        for (d, threads) in dirs.iter().zip(["1", "8"]) {
            let mut a = args.clone();
            let input;
            if *name == "fit" {
                input = d.join("heat.csv").to_string_lossy().into_owned();
                a.extend(["--input", input.as_str()]);
            }
            codes.push(run_cli(d, threads, &a));
        }
        if codes[0] != codes[1] {
            mismatches.push(format!("{name}: exit codes {codes:?}"));
        }
        for f in files.iter() {
            let (a, b) = (csv_bytes(&dirs[0], f), csv_bytes(&dirs[1], f));
            if a.is_empty() || a != b {
                mismatches.push(format!("{name}: {f} differs or is missing"));
            }
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "geom, heat, fit, diag and validate CSVs identical for 1 and 8 workers".to_string()
        } else {
            mismatches.join("; ")
        },
    )
}
