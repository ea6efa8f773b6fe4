//! Planar Brownian drivers `(B^N, B^T)` with their Lévy area
//! `A = int B^N dB^T - B^T dB^N`, running-maximum statistics, the joint law of
//! `(max, argmax)` of `B^N`, and the processes these drivers feed: the exact
//! horizontal Brownian motion of the group, its second-order chart truncation
//! `x'` and a log-ODE reference solution of the frame SDE.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hgroup::HPoint;
use crate::rng::{stream, Purpose};
use crate::tubechart::{ChartCoords, GeodesicChart};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub t_final: f64,
    pub n_steps: usize,
    pub n_substeps: usize,
    pub seed: u64,
    pub path_index: u64,
}

impl PathConfig {
    pub fn new(t_final: f64, n_steps: usize, n_substeps: usize, seed: u64, path_index: u64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) || n_steps == 0 || n_substeps == 0 {
            return Err(Error::InvalidInput(format!(
                "path config needs t_final > 0 and positive step counts, got ({t_final}, {n_steps}, {n_substeps})"
            )));
        }
        Ok(Self { t_final, n_steps, n_substeps, seed, path_index })
    }

    pub fn with_index(mut self, path_index: u64) -> Self {
        self.path_index = path_index;
        self
    }

    pub fn step(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn substep(&self) -> f64 {
        self.step() / self.n_substeps as f64
    }
}

/// Incremental substep generator. Each substep draws `dB^N` then `dB^T` from the
/// path's keyed stream and adds the midpoint-rule area increment, which for a
/// straight segment reduces to `B^N dB^T - B^T dB^N` at the segment start.
#[derive(Debug, Clone)]
pub struct Walk {
    rng: ChaCha8Rng,
    sqrt_h: f64,
    swap: bool,
    pub bn: f64,
    pub bt: f64,
    pub a: f64,
}

impl Walk {
    pub fn new(cfg: &PathConfig) -> Self {
        Self::keyed(cfg, false)
    }

    /// Same stream with the roles of the two components exchanged.
    pub fn swapped(cfg: &PathConfig) -> Self {
        Self::keyed(cfg, true)
    }

    fn keyed(cfg: &PathConfig, swap: bool) -> Self {
        Walk { rng: stream(cfg.seed, Purpose::Driver, cfg.path_index), sqrt_h: cfg.substep().sqrt(), swap, bn: 0.0, bt: 0.0, a: 0.0 }
    }

    /// Advances one substep and returns `(dB^N, dB^T)`.
    #[inline]
    pub fn advance(&mut self) -> (f64, f64) {
        let g1: f64 = self.rng.sample(StandardNormal);
        let g2: f64 = self.rng.sample(StandardNormal);
        let (dn, dt) = if self.swap { (g2, g1) } else { (g1, g2) };
        let (dn, dt) = (dn * self.sqrt_h, dt * self.sqrt_h);
        self.a += self.bn * dt - self.bt * dn;
        self.bn += dn;
        self.bt += dt;
        (dn, dt)
    }
}

/// States of a driver at the `n_steps + 1` grid instants.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverPath {
    pub times: Vec<f64>,
    pub bn: Vec<f64>,
    pub bt: Vec<f64>,
    pub a: Vec<f64>,
}

impl DriverPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn record(walk: &mut Walk, cfg: &PathConfig) -> Self {
        let n = cfg.n_steps + 1;
        let mut p = DriverPath { times: Vec::with_capacity(n), bn: Vec::with_capacity(n), bt: Vec::with_capacity(n), a: Vec::with_capacity(n) };
        let dt = cfg.step();
        for k in 0..n {
            if k > 0 {
                for _ in 0..cfg.n_substeps {
                    walk.advance();
                }
            }
            p.times.push(if k == cfg.n_steps { cfg.t_final } else { k as f64 * dt });
            p.bn.push(walk.bn);
            p.bt.push(walk.bt);
            p.a.push(walk.a);
        }
        p
    }
}

pub fn sample_driver(cfg: &PathConfig) -> DriverPath {
    DriverPath::record(&mut Walk::new(cfg), cfg)
}

/// The path drawn from the same stream with `B^N` and `B^T` exchanged.
pub fn sample_driver_swapped(cfg: &PathConfig) -> DriverPath {
    DriverPath::record(&mut Walk::swapped(cfg), cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxStats {
    pub xi: f64,
    pub tau: f64,
    pub bt_at_tau: f64,
    pub a_at_tau: f64,
}

/// Grid maximum of `B^N` and the driver state at its first grid argmax.
pub fn max_stats(path: &DriverPath) -> MaxStats {
    let mut k_best = 0;
    for k in 1..path.len() {
        if path.bn[k] > path.bn[k_best] {
            k_best = k;
        }
    }
    MaxStats { xi: path.bn[k_best], tau: path.times[k_best], bt_at_tau: path.bt[k_best], a_at_tau: path.a[k_best] }
}

/// Maximum of the Brownian interpolation of `B^N` between grid instants. Each
/// step's bridge maximum `(a + b + sqrt((b - a)^2 - 2 h ln U)) / 2` is drawn from
/// `rng`, and the argmax is placed uniformly inside the winning step. `B^T` and
/// `A` are read at the higher endpoint of that step.
pub fn bridge_max_stats<R: Rng + ?Sized>(path: &DriverPath, rng: &mut R) -> MaxStats {
    let mut best = (path.bn[0], 0usize);
    for k in 1..path.len() {
        let (a, b) = (path.bn[k - 1], path.bn[k]);
        let h = path.times[k] - path.times[k - 1];
        let u: f64 = 1.0 - rng.random::<f64>();
        let m = 0.5 * (a + b + ((b - a) * (b - a) - 2.0 * h * u.ln()).sqrt());
        if m > best.0 {
            best = (m, k);
        }
    }
    let k = best.1.max(1);
    let tau = path.times[k - 1] + rng.random::<f64>() * (path.times[k] - path.times[k - 1]);
    let g = if path.bn[k] >= path.bn[k - 1] { k } else { k - 1 };
    MaxStats { xi: best.0, tau, bt_at_tau: path.bt[g], a_at_tau: path.a[g] }
}

/// Joint density of `(max_{[0,t]} B, argmax)` at `(xi, tau)`.
pub fn joint_density_phi(xi: f64, tau: f64, t: f64) -> f64 {
    if xi < 0.0 || tau <= 0.0 || tau >= t {
        return 0.0;
    }
    xi * (-xi * xi / (2.0 * tau)).exp() / (std::f64::consts::PI * tau.powf(1.5) * (t - tau).sqrt())
}

/// Exact draw from the joint law: arcsine argmax, then a Rayleigh maximum of scale `sqrt(tau)`.
pub fn sample_max_argmax<R: Rng + ?Sized>(rng: &mut R, t: f64) -> (f64, f64) {
    let u: f64 = rng.random();
    let tau = t * (0.5 * std::f64::consts::PI * u).sin().powi(2);
    let v: f64 = 1.0 - rng.random::<f64>();
    let xi = (tau * -2.0 * v.ln()).sqrt();
    (xi, tau)
}

/// Horizontal Brownian motion `x * (B^N, B^T, A)` at the grid instants.
pub fn exact_group_bm(x: &HPoint, path: &DriverPath) -> Vec<HPoint> {
    (0..path.len()).map(|k| *x * HPoint::new(path.bn[k], path.bt[k], path.a[k])).collect()
}

/// A chart-based path, cut short at the first grid instant whose driver state
/// leaves the chart box.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePath {
    pub points: Vec<HPoint>,
    pub censored_at: Option<usize>,
}

impl FramePath {
    pub fn is_censored(&self) -> bool {
        self.censored_at.is_some()
    }
}

/// `x'_k = phi(B^N_k, B^T_k, A_k)`: the exponential of the truncated
/// log-signature in the extended frame.
pub fn truncated_frame_process(chart: &GeodesicChart, path: &DriverPath) -> FramePath {
    let mut points = Vec::with_capacity(path.len());
    for k in 0..path.len() {
        let c = ChartCoords::new(path.bn[k], path.bt[k], path.a[k]);
        if !chart.domain_box.contains(&c) {
            return FramePath { points, censored_at: Some(k) };
        }
        points.push(chart.phi_unchecked(&c));
    }
    FramePath { points, censored_at: None }
}

/// Solution of `dx = -N dB^N + T dB^T` (Stratonovich) in the extended frame,
/// by one log-ODE step per grid interval: the flow of
/// `-dB^N N + dB^T T + a Z` where `a` is the interval's own Lévy area.
pub fn frame_sde_process(chart: &GeodesicChart, path: &DriverPath, rk4_steps: usize) -> Vec<HPoint> {
    let mut q = chart.base;
    let mut out = Vec::with_capacity(path.len());
    out.push(q);
    for k in 1..path.len() {
        let dn = path.bn[k] - path.bn[k - 1];
        let dt = path.bt[k] - path.bt[k - 1];
        let local = path.a[k] - path.a[k - 1] - (path.bn[k - 1] * dt - path.bt[k - 1] * dn);
        q = chart.flow_rk4(&q, &ChartCoords::new(dn, dt, local), rk4_steps);
        out.push(q);
    }
    out
}
