//! Event decomposition of the chart-truncated process at the argmax time `tau_t`
//! of `B^N`, integrated over the shell.
//!
//! With `W = {|B^T_tau|^2 + |A_tau| < delta}` and `in = {x'_tau in Omega}`:
//! `I1 = P(B^N_tau < r, W)`, `I2 = P(B^N_tau < r, not in, W)`,
//! `I3 = P(B^N_tau >= r, in, W)`. Pathwise `I1 - I2 + I3 = P(in, W)`, while
//! `P(in) = P(T' > t) + P(tau < T' <= t) + P(T' <= tau, in)` where `T'` is the
//! first grid exit of `x'`.

use rayon::prelude::*;
use serde::Serialize;

use super::{ShellLayout, SimConfig};
use crate::domain::ImplicitDomain;
use crate::driver::{max_stats, sample_driver, truncated_frame_process, PathConfig};
use crate::error::{Error, Result};
use crate::stats::pairwise_sum;
use crate::tubechart::GeodesicChart;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventDecomposition {
    pub t: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// `int P(tau_t < T' <= t)`
    pub residual_tau_t: f64,
    /// `int P(T' <= tau_t, x'_tau in Omega)`
    pub residual_t_tau_in: f64,
    /// `int P(T' > t)`
    pub q_prime: f64,
    /// `int P(x'_tau in Omega, not W)`: the gap between the two sides of the identity.
    pub window_gap: f64,
    pub se_i1: f64,
    pub se_i2: f64,
    pub se_i3: f64,
    pub se_r1: f64,
    pub se_r2: f64,
    pub se_q_prime: f64,
    pub se_window_gap: f64,
    pub censored_fraction: f64,
    pub shell_volume: f64,
    pub delta: f64,
}

impl EventDecomposition {
    /// `I1 - I2 + I3`
    pub fn e_total(&self) -> f64 {
        self.i1 - self.i2 + self.i3
    }

    /// `|E - (Q' + residuals)|` against three combined standard errors.
    pub fn identity_holds(&self) -> bool {
        let lhs = self.e_total();
        let rhs = self.q_prime + self.residual_tau_t + self.residual_t_tau_in;
        let se =
            (self.se_i1.powi(2) + self.se_i2.powi(2) + self.se_i3.powi(2) + self.se_q_prime.powi(2) + self.se_r1.powi(2) + self.se_r2.powi(2)).sqrt();
        (lhs - rhs).abs() <= 3.0 * se.max(self.se_window_gap) + self.window_gap
    }
}

const N_EVENTS: usize = 7;

/// Event indicators of one path: I1, I2, I3, res1, res2, Q', window gap.
fn path_events(dom: &dyn ImplicitDomain, chart: &GeodesicChart, r: f64, pc: &PathConfig, delta: f64) -> Option<[bool; N_EVENTS]> {
    let path = sample_driver(pc);
    let fp = truncated_frame_process(chart, &path);
    if fp.is_censored() {
        return None;
    }
    let ms = max_stats(&path);
    let k_tau = path.times.iter().position(|&s| s == ms.tau).unwrap_or(0);
    let exit = fp.points.iter().position(|p| dom.value(p) >= 0.0);
    let inside_tau = dom.value(&fp.points[k_tau]) < 0.0;
    let window = ms.bt_at_tau * ms.bt_at_tau + ms.a_at_tau.abs() < delta;
    let below = ms.xi < r;
    Some([
        below && window,
        below && !inside_tau && window,
        !below && inside_tau && window,
        exit.is_some_and(|e| e > k_tau),
        exit.is_some_and(|e| e <= k_tau) && inside_tau,
        exit.is_none(),
        inside_tau && !window,
    ])
}

/// Shell-integrated event probabilities at time `t`, with charts built at every
/// shell node. `delta` defaults to the shell width.
pub fn decompose_events(dom: &dyn ImplicitDomain, layout: &ShellLayout, t: f64, cfg: &SimConfig, delta: Option<f64>) -> Result<EventDecomposition> {
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("time must be positive, got {t}")));
    }
    let delta = delta.unwrap_or(layout.eps);
    let n = cfg.n_paths;
    let mut means = vec![Vec::with_capacity(layout.nodes.len()); N_EVENTS];
    let mut vars = vec![Vec::with_capacity(layout.nodes.len()); N_EVENTS];
    let (mut censored, mut total) = (0usize, 0usize);
    for (i, node) in layout.nodes.iter().enumerate() {
        let chart = GeodesicChart::from_boundary(dom, &node.s, node.r)?;
        let pc = PathConfig::new(t, cfg.n_steps, cfg.n_substeps, cfg.seed, 0)?;
        let events: Vec<Option<[bool; N_EVENTS]>> =
            (0..n as u64).into_par_iter().map(|j| path_events(dom, &chart, node.r, &pc.with_index((i * n) as u64 + j), delta)).collect();
        let kept: Vec<[bool; N_EVENTS]> = events.iter().flatten().copied().collect();
        censored += n - kept.len();
        total += n;
        for e in 0..N_EVENTS {
            let (p, se) = if kept.is_empty() {
                (0.0, 0.0)
            } else {
                let m = kept.len() as f64;
                let p = kept.iter().filter(|k| k[e]).count() as f64 / m;
                (p, (p * (1.0 - p) / m).sqrt())
            };
            means[e].push(node.weight * p);
            vars[e].push((node.weight * se).powi(2));
        }
    }
    let v: Vec<f64> = (0..N_EVENTS).map(|e| pairwise_sum(&means[e])).collect();
    let s: Vec<f64> = (0..N_EVENTS).map(|e| pairwise_sum(&vars[e]).sqrt()).collect();
    Ok(EventDecomposition {
        t,
        i1: v[0],
        i2: v[1],
        i3: v[2],
        residual_tau_t: v[3],
        residual_t_tau_in: v[4],
        q_prime: v[5],
        window_gap: v[6],
        se_i1: s[0],
        se_i2: s[1],
        se_i3: s[2],
        se_r1: s[3],
        se_r2: s[4],
        se_q_prime: s[5],
        se_window_gap: s[6],
        censored_fraction: censored as f64 / total.max(1) as f64,
        shell_volume: layout.shell_volume(),
        delta,
    })
}
