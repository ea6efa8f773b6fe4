//! Survival probabilities of the horizontal Brownian motion, the heat content
//! `Q(t) = int_Omega P_x(exit time > t) dx` assembled over a boundary shell,
//! the fit of `Q(t) = c0 - c1 sqrt(t) + c2 t`, and event-decomposition
//! diagnostics.

pub mod decompose;
pub mod disk;
pub mod fit;

pub use decompose::{decompose_events, EventDecomposition};
pub use fit::{fit_expansion, ExpansionFit};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::ImplicitDomain;
use crate::driver::{PathConfig, Walk};
use crate::error::{Error, Result};
use crate::hgroup::HPoint;
use crate::rng::{stream, Purpose};
use crate::stats::{pairwise_sum, GL4};
use crate::surfgeom::{
    characteristic_scan, coarsen, frame_gradient, horizontal_mean_curvature, volume, QuadNode, SurfacePoint, SurfaceQuadrature, VolumeEstimate,
    CHAR_TOL,
};
use crate::tubechart::{reach_probe, tube_jacobian, tube_point_psi};

/// Monte Carlo settings shared by the estimators. `n_steps` spans the largest
/// requested time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub n_substeps: usize,
    pub seed: u64,
    /// Monitor every substep and add the Brownian-bridge crossing probability
    /// between monitored points.
    pub bridge: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { n_paths: 10_000, n_steps: 256, n_substeps: 8, seed: 0, bridge: true }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 || self.n_substeps == 0 {
            return Err(Error::InvalidInput("n_paths, n_steps and n_substeps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    pub x: HPoint,
    pub t: f64,
    pub p_hat: f64,
    pub std_err: f64,
    pub n_paths: usize,
    pub censored_fraction: f64,
}

fn binomial(successes: usize, n: usize) -> (f64, f64) {
    let p = successes as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Signed horizontal distance proxy `-F / |grad_H F|`, positive inside.
fn barrier_distance(dom: &dyn ImplicitDomain, p: &HPoint, f: f64) -> f64 {
    let g = frame_gradient(dom, p);
    let gh = g[0].hypot(g[1]);
    if gh > 0.0 {
        -f / gh
    } else {
        f64::INFINITY
    }
}

/// Upper bound on `|grad_H F|` over the domain box, from a sampled maximum with a factor-2 margin.
pub fn horizontal_gradient_bound(dom: &dyn ImplicitDomain) -> f64 {
    let b = dom.bbox();
    let n = 12;
    let mut g: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                let p = b.lerp([i, j, k].map(|m| m as f64 / n as f64));
                let fg = frame_gradient(dom, &p);
                g = g.max(fg[0].hypot(fg[1]));
            }
        }
    }
    2.0 * g
}

/// Crossing probabilities below `exp(-40)` are skipped without evaluating the gradient.
const NEGLIGIBLE_EXPONENT: f64 = 40.0;

/// First monitored substep (counted from 1) at which the path from `x` is
/// outside, or `None` if it survives the whole path. `grad_bound` bounds
/// `|grad_H F|` and is used only to skip negligible bridge crossings.
pub fn first_exit(dom: &dyn ImplicitDomain, x: &HPoint, pc: &PathConfig, bridge: bool, grad_bound: f64) -> Option<usize> {
    let mut walk = Walk::new(pc);
    let at = |w: &Walk| HPoint::new(x.x1 + w.bn, x.x2 + w.bt, x.x3 + w.a + x.x1 * w.bt - x.x2 * w.bn);
    let h = pc.substep();
    if bridge {
        let mut aux = stream(pc.seed, Purpose::Bridge, pc.path_index);
        let mut prev = (*x, dom.value(x));
        for k in 1..=pc.n_steps * pc.n_substeps {
            walk.advance();
            let p = at(&walk);
            let f = dom.value(&p);
            if f >= 0.0 {
                return Some(k);
            }
            // lower bounds on both distances decide whether the bridge term can matter
            if prev.1 * f / (grad_bound * grad_bound) < 0.5 * NEGLIGIBLE_EXPONENT * h {
                let d0 = barrier_distance(dom, &prev.0, prev.1);
                let d1 = barrier_distance(dom, &p, f);
                let cross = (-2.0 * d0 * d1 / h).exp();
                if cross > (-NEGLIGIBLE_EXPONENT).exp() && aux.random::<f64>() < cross {
                    return Some(k);
                }
            }
            prev = (p, f);
        }
        None
    } else {
        let mut buf = vec![HPoint::IDENTITY; pc.n_substeps];
        for step in 0..pc.n_steps {
            for b in buf.iter_mut() {
                walk.advance();
                *b = at(&walk);
            }
            if dom.value(&buf[pc.n_substeps - 1]) >= 0.0 {
                // locate the first monitored substep outside within this step
                let j = buf.iter().position(|p| dom.value(p) >= 0.0).unwrap_or(pc.n_substeps - 1);
                return Some(step * pc.n_substeps + j + 1);
            }
        }
        None
    }
}

/// Index of the last substep instant not after `t`.
fn substep_cutoff(t: f64, h: f64) -> usize {
    let k = t / h;
    (k + 1e-9 * k.max(1.0)).floor() as usize
}

/// Exit substeps of `cfg.n_paths` paths started at `x`, using path indices
/// `first_index..first_index + n_paths`.
fn exit_profile(dom: &dyn ImplicitDomain, x: &HPoint, t_max: f64, cfg: &SimConfig, first_index: u64) -> Result<Vec<Option<usize>>> {
    let pc = PathConfig::new(t_max, cfg.n_steps, cfg.n_substeps, cfg.seed, 0)?;
    let g = horizontal_gradient_bound(dom);
    Ok((0..cfg.n_paths as u64).into_par_iter().map(|i| first_exit(dom, x, &pc.with_index(first_index + i), cfg.bridge, g)).collect())
}

fn survivors(exits: &[Option<usize>], cutoff: usize) -> usize {
    exits.iter().filter(|e| e.is_none_or(|k| k > cutoff)).count()
}

/// Survival probabilities at every `t` in `ts` from one population of paths.
pub fn estimate_survival_grid(dom: &dyn ImplicitDomain, x: &HPoint, ts: &[f64], cfg: &SimConfig) -> Result<Vec<SurvivalEstimate>> {
    cfg.validate()?;
    let t_max = ts.iter().cloned().fold(f64::NAN, f64::max);
    if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidInput("survival times must be positive".into()));
    }
    if dom.value(x) >= 0.0 {
        return Err(Error::InvalidInput(format!("starting point {x:?} is not inside {}", dom.name())));
    }
    let exits = exit_profile(dom, x, t_max, cfg, 0)?;
    let h = t_max / (cfg.n_steps * cfg.n_substeps) as f64;
    Ok(ts
        .iter()
        .map(|&t| {
            let (p_hat, std_err) = binomial(survivors(&exits, substep_cutoff(t, h)), cfg.n_paths);
            SurvivalEstimate { x: *x, t, p_hat, std_err, n_paths: cfg.n_paths, censored_fraction: 0.0 }
        })
        .collect())
}

pub fn estimate_survival(dom: &dyn ImplicitDomain, x: &HPoint, t: f64, cfg: &SimConfig) -> Result<SurvivalEstimate> {
    Ok(estimate_survival_grid(dom, x, &[t], cfg)?[0])
}

/// A shell quadrature node at distance `r` from the boundary point `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellNode {
    pub s: SurfacePoint,
    pub r: f64,
    pub x: HPoint,
    /// Lebesgue measure carried by the node: `J(s, r) dsigma_0 dr`.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShellEps {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellOptions {
    /// Approximate number of boundary nodes after coarsening.
    pub surface_nodes: usize,
    /// Width of the innermost radial interval; intervals double outward.
    pub inner_width: f64,
    pub quadrature_level: u32,
}

impl ShellOptions {
    /// Resolves the boundary layer of the smallest time in `ts`.
    pub fn for_times(ts: &[f64]) -> Self {
        let t_min = ts.iter().cloned().fold(f64::INFINITY, f64::min);
        ShellOptions { surface_nodes: 11, inner_width: 0.5 * t_min.sqrt(), quadrature_level: 3 }
    }
}

/// Radial nodes and weights on `[0, eps]`: Gauss-Legendre on intervals
/// `[0, w], [w, 2w], [2w, 4w], ...` with the last one ending at `eps`.
pub fn radial_rule(eps: f64, inner_width: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![eps];
    while edges.last().copied().unwrap_or(0.0) > 1.5 * inner_width {
        let last = *edges.last().unwrap_or(&eps);
        edges.push(0.5 * last);
    }
    edges.push(0.0);
    edges.reverse();
    edges
        .windows(2)
        .flat_map(|w| {
            let (a, b) = (w[0], w[1]);
            GL4.iter().map(move |&(u, g)| (0.5 * (a + b) + 0.5 * (b - a) * u, 0.5 * (b - a) * g))
        })
        .collect()
}

/// Precomputed geometry for heat-content estimates.
#[derive(Debug, Clone)]
pub struct ShellLayout {
    pub eps: f64,
    pub nodes: Vec<ShellNode>,
    pub volume: VolumeEstimate,
    pub reach: f64,
    pub surface: Vec<QuadNode>,
}

impl ShellLayout {
    /// Total measure carried by the shell nodes.
    pub fn shell_volume(&self) -> f64 {
        pairwise_sum(&self.nodes.iter().map(|n| n.weight).collect::<Vec<_>>())
    }

    pub fn interior_volume(&self) -> f64 {
        self.volume.value - self.shell_volume()
    }
}

/// Largest radius for which the tube map stays a nearest-point parametrization,
/// probed on a coarse node set.
pub fn probe_reach(dom: &dyn ImplicitDomain, quad: &SurfaceQuadrature) -> f64 {
    let tested = coarsen(dom, quad, 20);
    let candidates = coarsen(dom, quad, 200);
    let t: Vec<SurfacePoint> = tested.iter().map(|n| n.sp).collect();
    let c: Vec<SurfacePoint> = candidates.iter().map(|n| n.sp).collect();
    let r_max = dom.reach_hint().unwrap_or(f64::INFINITY).min(0.5 * dom.bbox().diameter());
    reach_probe(dom, &t, &c, r_max).reach
}

/// `max(reach / 4, 4 sqrt(t_max))`, capped at `0.9 reach`.
pub fn auto_shell_eps(reach: f64, t_max: f64) -> f64 {
    (0.25 * reach).max(4.0 * t_max.sqrt()).min(0.9 * reach)
}

pub fn build_shell(dom: &dyn ImplicitDomain, quad: &SurfaceQuadrature, eps: ShellEps, t_max: f64, opts: &ShellOptions) -> Result<ShellLayout> {
    let scan = characteristic_scan(dom, quad, CHAR_TOL);
    if !scan.is_clean() {
        return Err(Error::CharacteristicDomain { count: scan.flagged.len(), min_nh: scan.min_nh });
    }
    let reach = probe_reach(dom, quad);
    let eps = match eps {
        ShellEps::Auto => auto_shell_eps(reach, t_max),
        ShellEps::Fixed(e) => e,
    };
    if !(eps > 0.0) || eps > reach + 1e-9 {
        return Err(Error::ReachExceeded { r: eps, detail: format!("probed reach {reach}") });
    }
    let surface = coarsen(dom, quad, opts.surface_nodes);
    let radial = radial_rule(eps, opts.inner_width.min(eps));
    let jobs: Vec<(QuadNode, (f64, f64))> = surface.iter().flat_map(|s| radial.iter().map(move |r| (*s, *r))).collect();
    let nodes: Result<Vec<ShellNode>> = jobs
        .par_iter()
        .map(|(q, (r, wr))| {
            let x = tube_point_psi(dom, &q.sp, *r)?;
            let j = tube_jacobian(dom, &q.sp, *r)?;
            Ok(ShellNode { s: q.sp, r: *r, x, weight: q.weight * q.sp.nh_norm * j * wr })
        })
        .collect();
    Ok(ShellLayout { eps, nodes: nodes?, volume: volume(dom), reach, surface })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatContentEstimate {
    pub t: f64,
    pub q_hat: f64,
    pub std_err: f64,
    pub shell_eps: f64,
    pub interior_volume: f64,
    pub n_shell_nodes: usize,
    pub n_paths_per_node: usize,
    pub censored_fraction: f64,
    /// `exp(-eps^2 / (8 t))` times the interior volume: size of the neglected interior deficit.
    pub interior_bound: f64,
}

/// `Q(t) = interior volume + sum_nodes weight * P_node(survive t)` for every `t`
/// in `ts`, each node reusing one path population across times.
pub fn heat_content(dom: &dyn ImplicitDomain, layout: &ShellLayout, ts: &[f64], cfg: &SimConfig) -> Result<Vec<HeatContentEstimate>> {
    cfg.validate()?;
    if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidInput("heat content times must be positive".into()));
    }
    let t_max = ts.iter().cloned().fold(f64::NAN, f64::max);
    let h = t_max / (cfg.n_steps * cfg.n_substeps) as f64;
    let cutoffs: Vec<usize> = ts.iter().map(|&t| substep_cutoff(t, h)).collect();
    let n = cfg.n_paths;
    // counts[node][time]
    let mut counts = Vec::with_capacity(layout.nodes.len());
    for (i, node) in layout.nodes.iter().enumerate() {
        let exits = exit_profile(dom, &node.x, t_max, cfg, (i * n) as u64)?;
        counts.push(cutoffs.iter().map(|&c| survivors(&exits, c)).collect::<Vec<_>>());
    }
    let interior = layout.interior_volume();
    Ok(ts
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut mean = Vec::with_capacity(layout.nodes.len());
            let mut var = Vec::with_capacity(layout.nodes.len());
            for (node, c) in layout.nodes.iter().zip(&counts) {
                let (p, se) = binomial(c[k], n);
                mean.push(node.weight * p);
                var.push((node.weight * se).powi(2));
            }
            HeatContentEstimate {
                t,
                q_hat: interior + pairwise_sum(&mean),
                std_err: pairwise_sum(&var).sqrt(),
                shell_eps: layout.eps,
                interior_volume: interior,
                n_shell_nodes: layout.nodes.len(),
                n_paths_per_node: n,
                censored_fraction: 0.0,
                interior_bound: interior.max(0.0) * (-layout.eps * layout.eps / (8.0 * t)).exp(),
            }
        })
        .collect())
}

/// Builds the shell (surface quadrature at `opts.quadrature_level`) and estimates `Q(t)`.
pub fn estimate_heat_content(dom: &dyn ImplicitDomain, ts: &[f64], shell_eps: ShellEps, cfg: &SimConfig) -> Result<Vec<HeatContentEstimate>> {
    let opts = ShellOptions::for_times(ts);
    let quad = SurfaceQuadrature::build(dom, opts.quadrature_level)?;
    let t_max = ts.iter().cloned().fold(f64::NAN, f64::max);
    let layout = build_shell(dom, &quad, shell_eps, t_max, &opts)?;
    heat_content(dom, &layout, ts, cfg)
}

/// Coefficients of `Q(t) = c0 - c1 sqrt(t) + c2 t` predicted from the geometry:
/// volume, `sqrt(2/pi)` times the horizontal perimeter, and a quarter of the
/// integrated horizontal mean curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictedCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c0_err: f64,
    pub c1_err: f64,
    pub c2_err: f64,
    pub sigma0: f64,
    pub total_mean_curvature: f64,
}

pub fn predicted_coefficients(dom: &dyn ImplicitDomain, quad: &SurfaceQuadrature) -> Result<PredictedCoefficients> {
    let scan = characteristic_scan(dom, quad, CHAR_TOL);
    if !scan.is_clean() {
        return Err(Error::CharacteristicDomain { count: scan.flagged.len(), min_nh: scan.min_nh });
    }
    let vol = volume(dom);
    let (sigma0, s_err) = quad.richardson(|n| n.weight * n.sp.nh_norm);
    let (total_h, h_err) = quad.richardson(|n| horizontal_mean_curvature(dom, &n.sp).map_or(f64::NAN, |h| h * n.weight * n.sp.nh_norm));
    if !total_h.is_finite() {
        return Err(Error::ConvergenceFailure("mean curvature undefined at a quadrature node".into()));
    }
    let k = (2.0 / std::f64::consts::PI).sqrt();
    Ok(PredictedCoefficients {
        c0: vol.value,
        c1: k * sigma0,
        c2: 0.25 * total_h,
        c0_err: vol.est_error,
        c1_err: k * s_err,
        c2_err: 0.25 * h_err,
        sigma0,
        total_mean_curvature: total_h,
    })
}
