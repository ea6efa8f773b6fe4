//! The exponential chart `phi_x(xi, y, z) = exp_x(-xi N + y T + z Z)` built on a
//! normal geodesic, its inverse and Jacobian, the boundary graph `h(y, z)` and
//! the tube parametrization `Psi(s, r)` of a collar of the boundary.
//!
//! With `zeta = y + i xi`, the planar part of `base^-1 * phi` is the rotation by
//! `theta` of `E = (exp(lambda zeta) - 1) / lambda`, which makes the inverse a
//! principal complex logarithm.

use num_complex::Complex64;

use crate::domain::{cross3, norm3, ImplicitDomain};
use crate::error::{Error, Result};
use crate::hgroup::{cc_distance, cc_geodesic, koranyi_norm, wrap_angle, FrameVector, GeodesicParams, HPoint};
use crate::surfgeom::{g1_normal, horizontal_frame, normal_curvature_lambda, project_to_surface, SurfacePoint};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChartCoords {
    pub xi: f64,
    pub y: f64,
    pub z: f64,
}

impl ChartCoords {
    pub const fn new(xi: f64, y: f64, z: f64) -> Self {
        Self { xi, y, z }
    }
}

/// Half-widths of the coordinate box on which a chart is certified invertible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartBox {
    pub xi: f64,
    pub y: f64,
    pub z: f64,
}

impl ChartBox {
    /// `|xi|, |y| <= min(r + 0.5 / max(|lambda|, 1), pi / (2 |lambda|))`, `|z| <= 0.25`.
    pub fn default_for(lambda: f64, r: f64) -> Self {
        let mut m = r + 0.5 / lambda.abs().max(1.0);
        if lambda != 0.0 {
            m = m.min(std::f64::consts::FRAC_PI_2 / lambda.abs());
        }
        ChartBox { xi: m, y: m, z: 0.25 }
    }

    pub fn contains(&self, c: &ChartCoords) -> bool {
        c.xi.abs() <= self.xi && c.y.abs() <= self.y && c.z.abs() <= self.z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicChart {
    pub base: HPoint,
    pub theta: f64,
    pub lambda: f64,
    /// Distance along the `xi` axis from `base` to the boundary.
    pub r: f64,
    pub domain_box: ChartBox,
}

/// Horizontal and vertical frame fields extending `N, T, Z` off the base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedFrame {
    pub n: FrameVector,
    pub t: FrameVector,
    pub z: FrameVector,
    pub f: f64,
}

include!("tubechart_series.rs");

/// `K(u, v) / lambda^2` with `u = lambda y`, `v = lambda xi` and
/// `K = e^u sin v - v (e^{2u} - 1) / (2u)`; a power series where `K` cancels.
fn k_over_lambda2(lambda: f64, y: f64, xi: f64) -> f64 {
    let s = lambda.abs() * y.abs().max(xi.abs());
    if s < 0.03 {
        k_series(lambda, y, xi)
    } else {
        let (u, v) = (lambda * y, lambda * xi);
        (u.exp() * v.sin() - v * h1(u)) / (lambda * lambda)
    }
}

fn k_series(lambda: f64, y: f64, xi: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let (u, v) = (lambda * y, lambda * xi);
    let mut up = [1.0; 14];
    let mut vp = [1.0; 14];
    for k in 1..14 {
        up[k] = up[k - 1] * u;
        vp[k] = vp[k - 1] * v;
    }
    // every term has total degree >= 3, so dividing by lambda^2 loses nothing
    let sum: f64 = K_SERIES.iter().rev().map(|&(i, j, c)| c * up[i as usize] * vp[j as usize]).sum();
    sum / (lambda * lambda)
}

/// `(e^{2u} - 1) / (2u)`
fn h1(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        (2.0 * u).exp_m1() / (2.0 * u)
    }
}

/// `(e^w - 1) / w` for complex `w`.
fn expm1_ratio(w: Complex64) -> Complex64 {
    if w.norm() < 1e-8 {
        return 1.0 + w / 2.0;
    }
    let (a, b) = (w.re, w.im);
    let half = (0.5 * b).sin();
    let num = Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin());
    num / w
}

/// `log(1 + w) / w` on the principal branch.
fn log1p_ratio(w: Complex64) -> Complex64 {
    if w.norm() < 1e-8 {
        return 1.0 - w / 2.0;
    }
    let re = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    let im = w.im.atan2(1.0 + w.re);
    Complex64::new(re, im) / w
}

impl GeodesicChart {
    pub fn new(base: HPoint, theta: f64, lambda: f64, r: f64) -> Self {
        Self { base, theta: wrap_angle(theta), lambda, r, domain_box: ChartBox::default_for(lambda, r) }
    }

    pub fn with_box(mut self, domain_box: ChartBox) -> Self {
        self.domain_box = domain_box;
        self
    }

    /// Chart at `Psi(s, r)` whose `xi` axis is the normal geodesic through `s`;
    /// `phi(r, 0, 0) = s`.
    pub fn from_boundary(dom: &dyn ImplicitDomain, s: &SurfacePoint, r: f64) -> Result<Self> {
        let lambda = normal_curvature_lambda(s)?;
        let base = tube_point_psi(dom, s, r)?;
        Ok(Self::new(base, s.normal_angle() + lambda * r, lambda, r))
    }

    /// The chart based at the boundary point `phi(r, 0, 0)` on the same geodesic.
    pub fn boundary_chart(&self) -> Self {
        let base = self.phi_unchecked(&ChartCoords::new(self.r, 0.0, 0.0));
        Self::new(base, self.theta - self.lambda * self.r, self.lambda, 0.0)
    }

    /// `base^-1 * phi(c)`.
    pub fn displacement(&self, c: &ChartCoords) -> HPoint {
        let zeta = Complex64::new(c.y, c.xi);
        let e = zeta * expm1_ratio(self.lambda * zeta);
        let (st, ct) = self.theta.sin_cos();
        HPoint::new(ct * e.im - st * e.re, ct * e.re + st * e.im, c.z * h1(self.lambda * c.y) + k_over_lambda2(self.lambda, c.y, c.xi))
    }

    pub fn phi_unchecked(&self, c: &ChartCoords) -> HPoint {
        self.base * self.displacement(c)
    }

    /// The extended frame at `q`: `N = -a X1 - b X2`, `T = -b X1 + a X2`,
    /// `Z = f X3` with `f = a^2 + b^2`.
    pub fn frame_fields(&self, q: &HPoint) -> ExtendedFrame {
        let a = self.theta.cos() + self.lambda * (q.x2 - self.base.x2);
        let b = self.theta.sin() - self.lambda * (q.x1 - self.base.x1);
        let f = a * a + b * b;
        ExtendedFrame { n: FrameVector::horizontal(-a, -b), t: FrameVector::horizontal(-b, a), z: FrameVector::new(0.0, 0.0, f), f }
    }

    /// Cartesian value of the field `-xi N + y T + z Z` at `q`.
    pub fn flow_field(&self, q: &HPoint, c: &ChartCoords) -> [f64; 3] {
        let fr = self.frame_fields(q);
        let v = FrameVector::new(-c.xi * fr.n.a + c.y * fr.t.a, -c.xi * fr.n.b + c.y * fr.t.b, c.z * fr.f);
        v.to_cartesian(q)
    }

    /// Time-one RK4 flow of `-xi N + y T + z Z` from `q0`.
    pub fn flow_rk4(&self, q0: &HPoint, c: &ChartCoords, n_steps: usize) -> HPoint {
        let h = 1.0 / n_steps as f64;
        let mut q = *q0;
        for _ in 0..n_steps {
            let k1 = self.flow_field(&q, c);
            let k2 = self.flow_field(&q.offset(k1, 0.5 * h), c);
            let k3 = self.flow_field(&q.offset(k2, 0.5 * h), c);
            let k4 = self.flow_field(&q.offset(k3, h), c);
            let v = [0, 1, 2].map(|k| (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]) / 6.0);
            q = q.offset(v, h);
        }
        q
    }
}

pub fn phi(chart: &GeodesicChart, c: &ChartCoords) -> Result<HPoint> {
    if !chart.domain_box.contains(c) {
        return Err(Error::OutOfChart(format!("{c:?} outside {:?}", chart.domain_box)));
    }
    Ok(chart.phi_unchecked(c))
}

pub fn phi_inverse(chart: &GeodesicChart, q: &HPoint) -> Result<ChartCoords> {
    let w = chart.base.inv() * *q;
    let lam = chart.lambda;
    let rot = Complex64::new(chart.theta.cos(), -chart.theta.sin());
    let e = (Complex64::new(0.0, -1.0) * rot * Complex64::new(w.x1, w.x2)).conj();
    let arg = 1.0 + lam * e;
    if arg.re <= 0.0 {
        return Err(Error::OutOfChart(format!("logarithm argument {arg} off the principal domain")));
    }
    let zeta = e * log1p_ratio(lam * e);
    let (y, xi) = (zeta.re, zeta.im);
    let z = (w.x3 - k_over_lambda2(lam, y, xi)) / h1(lam * y);
    let c = ChartCoords::new(xi, y, z);
    if !chart.domain_box.contains(&c) {
        return Err(Error::OutOfChart(format!("{c:?} outside {:?}", chart.domain_box)));
    }
    let back = chart.phi_unchecked(&c);
    let scale = 1.0 + q.x1.abs().max(q.x2.abs()).max(q.x3.abs());
    if back.euclid_dist(q) > 1e-9 * scale {
        return Err(Error::OutOfChart(format!("inverse residual {:e}", back.euclid_dist(q))));
    }
    Ok(c)
}

/// `det d phi = e^{2 lambda y} (e^{2 lambda y} - 1) / (2 lambda y)`, equal to 1 at `lambda y = 0`.
pub fn phi_jacobian_det(lambda: f64, y: f64) -> f64 {
    let u = lambda * y;
    (2.0 * u).exp() * h1(u)
}

/// `sqrt(xi^2 + y^2 + |z|)`
pub fn homogeneous_norm(c: &ChartCoords) -> f64 {
    (c.xi * c.xi + c.y * c.y + c.z.abs()).sqrt()
}

/// `((xi^2 + y^2)^2 + 4 z^2)^(1/4)`, the chart analogue of the Korányi gauge.
pub fn quartic_gauge(c: &ChartCoords) -> f64 {
    let rho2 = c.xi * c.xi + c.y * c.y;
    (rho2 * rho2 + 4.0 * c.z * c.z).sqrt().sqrt()
}

/// `koranyi(base^-1 * phi(c)) / homogeneous_norm(c)`.
pub fn comparability_ratio(chart: &GeodesicChart, c: &ChartCoords) -> Result<f64> {
    let q = phi(chart, c)?;
    Ok(koranyi_norm(&(chart.base.inv() * q)) / homogeneous_norm(c))
}

/// `koranyi(base^-1 * phi(c)) / quartic_gauge(c)`; tends to 1 as `c -> 0`.
pub fn gauge_ratio(chart: &GeodesicChart, c: &ChartCoords) -> Result<f64> {
    let q = phi(chart, c)?;
    Ok(koranyi_norm(&(chart.base.inv() * q)) / quartic_gauge(c))
}

fn illinois(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    let mut side = 0i32;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() <= 2.0 * f64::EPSILON * (1.0 + c.abs()) {
            return c;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// `h(y, z) = r - xi*` where `xi*` is the boundary crossing on the line `(., y, z)` near `xi = r`.
pub fn boundary_graph_h(dom: &dyn ImplicitDomain, chart: &GeodesicChart, y: f64, z: f64) -> Result<f64> {
    let fx = |xi: f64| dom.value(&chart.phi_unchecked(&ChartCoords::new(xi, y, z)));
    let limit = chart.domain_box.xi;
    let mut w = 4.0 * (y.abs() + z.abs().sqrt()) + 1e-6;
    loop {
        let lo = (chart.r - w).max(-limit);
        let hi = (chart.r + w).min(limit);
        let n = 32;
        let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|&x| fx(x)).collect();
        let changes: Vec<usize> = (0..n).filter(|&k| (fs[k] < 0.0) != (fs[k + 1] < 0.0)).collect();
        match changes.len() {
            1 => {
                let k = changes[0];
                let root = illinois(&fx, xs[k], xs[k + 1], fs[k], fs[k + 1]);
                return Ok(chart.r - root);
            }
            0 if lo > -limit || hi < limit => w *= 4.0,
            0 => return Err(Error::NoRoot(format!("(y, z) = ({y}, {z})"))),
            m => return Err(Error::MultipleRoots(format!("{m} crossings at (y, z) = ({y}, {z})"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HExpansion {
    pub half_h: f64,
    pub k1: f64,
    pub cubic_bound: f64,
}

/// Second-order fit of the boundary graph at the chart's boundary point:
/// `h(y, z) = (H/2) y^2 + k1 z + O(|y|^3 + |y z| + z^2)`.
///
/// Derivatives use central differences at steps `1e-3` and `5e-4` combined by
/// Richardson extrapolation.
pub fn h_expansion(dom: &dyn ImplicitDomain, chart: &GeodesicChart) -> Result<HExpansion> {
    let bc = chart.boundary_chart();
    let h = |y: f64, z: f64| boundary_graph_h(dom, &bc, y, z);
    let h0 = h(0.0, 0.0)?;
    let d2 = |d: f64| -> Result<f64> { Ok((h(d, 0.0)? - 2.0 * h0 + h(-d, 0.0)?) / (d * d)) };
    let dz = |d: f64| -> Result<f64> { Ok((h(0.0, d)? - h(0.0, -d)?) / (2.0 * d)) };
    let step = 1e-3;
    let hyy = (4.0 * d2(0.5 * step)? - d2(step)?) / 3.0;
    let k1 = (4.0 * dz(0.5 * step)? - dz(step)?) / 3.0;
    let half_h = 0.5 * hyy;
    let mut cubic_bound: f64 = 0.0;
    let rad = 0.04f64.min(0.5 * bc.domain_box.y).min(0.5 * bc.domain_box.z);
    for i in -4i32..=4 {
        for j in -4i32..=4 {
            if i == 0 && j == 0 {
                continue;
            }
            let (y, z) = (rad * f64::from(i) / 4.0, rad * f64::from(j) / 4.0);
            let rem = (h(y, z)? - half_h * y * y - k1 * z).abs();
            cubic_bound = cubic_bound.max(rem / (y.abs().powi(3) + (y * z).abs() + z * z));
        }
    }
    Ok(HExpansion { half_h, k1, cubic_bound })
}

/// The point at distance `r` from the boundary along the inward normal geodesic through `s`.
fn psi_unchecked(s: &SurfacePoint, r: f64) -> Result<HPoint> {
    let lambda = normal_curvature_lambda(s)?;
    let g = GeodesicParams::new(s.p, s.normal_angle() + std::f64::consts::PI, -lambda);
    cc_geodesic(&g, r).map_err(|e| Error::ReachExceeded { r, detail: e.to_string() })
}

/// Tube map `Psi(s, r)`, validated by `d_cc(Psi(s, r), s) = r`.
pub fn tube_point_psi(_dom: &dyn ImplicitDomain, s: &SurfacePoint, r: f64) -> Result<HPoint> {
    let x = psi_unchecked(s, r)?;
    if r > 0.0 {
        let d = cc_distance(&x, &s.p)?;
        if (d - r).abs() > 1e-6 {
            return Err(Error::ReachExceeded { r, detail: format!("d_cc(Psi, s) = {d}") });
        }
    }
    Ok(x)
}

/// Orthonormal cartesian tangent pair at `s`: the Legendrian direction and its complement.
fn tangent_pair(dom: &dyn ImplicitDomain, s: &SurfacePoint) -> Result<([f64; 3], [f64; 3])> {
    let (_, t) = horizontal_frame(s)?;
    let tc = t.to_cartesian(&s.p);
    let tn = norm3(tc);
    let tc = tc.map(|v| v / tn);
    let g = dom.gradient(&s.p);
    let u = cross3(g, tc);
    let un = norm3(u);
    Ok((tc, u.map(|v| v / un)))
}

/// Density of Lebesgue measure in tube coordinates against `d sigma_0 dr`.
pub fn tube_jacobian(dom: &dyn ImplicitDomain, s: &SurfacePoint, r: f64) -> Result<f64> {
    tube_point_psi(dom, s, r)?;
    let (tc, uc) = tangent_pair(dom, s)?;
    let h = 1e-4;
    let surf = |a: f64, b: f64| -> Result<SurfacePoint> {
        let q = project_to_surface(dom, &s.p.offset(tc, a).offset(uc, b), 10.0 * h)?;
        g1_normal(dom, &q)
    };
    let diff = |p: HPoint, m: HPoint| [(p.x1 - m.x1) / (2.0 * h), (p.x2 - m.x2) / (2.0 * h), (p.x3 - m.x3) / (2.0 * h)];
    let (sa_p, sa_m, sb_p, sb_m) = (surf(h, 0.0)?, surf(-h, 0.0)?, surf(0.0, h)?, surf(0.0, -h)?);
    let da = diff(psi_unchecked(&sa_p, r)?, psi_unchecked(&sa_m, r)?);
    let db = diff(psi_unchecked(&sb_p, r)?, psi_unchecked(&sb_m, r)?);
    let dr = diff(psi_unchecked(s, r + h)?, psi_unchecked(s, r - h)?);
    let det = crate::domain::dot3(cross3(da, db), dr).abs();
    let to_frame = |v: [f64; 3]| FrameVector::from_cartesian(&s.p, v);
    let (fa, fb) = (to_frame(diff(sa_p.p, sa_m.p)), to_frame(diff(sb_p.p, sb_m.p)));
    let area = norm3(cross3([fa.a, fa.b, fa.c], [fb.a, fb.b, fb.c]));
    Ok(det / (s.nh_norm * area))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachProbe {
    pub reach: f64,
    pub n_tested: usize,
    pub n_candidates: usize,
}

/// Largest `r <= r_max` for which every tested `Psi(s, r)` lies in the domain,
/// passes the distance validation, and has no candidate boundary point closer
/// than `r`. Found by bisection.
pub fn reach_probe(dom: &dyn ImplicitDomain, tested: &[SurfacePoint], candidates: &[SurfacePoint], r_max: f64) -> ReachProbe {
    let ok = |r: f64| {
        tested.iter().all(|s| match tube_point_psi(dom, s, r) {
            Ok(x) => dom.value(&x) < 0.0 && candidates.iter().all(|c| cc_distance(&x, &c.p).map(|d| d >= r - 1e-6).unwrap_or(false)),
            Err(_) => false,
        })
    };
    let reach = if ok(r_max) {
        r_max
    } else {
        let (mut lo, mut hi) = (0.0, r_max);
        for _ in 0..24 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    ReachProbe { reach, n_tested: tested.len(), n_candidates: candidates.len() }
}
