//! The first Heisenberg group in global coordinates.
//!
//! Points multiply by `(x1,x2,x3)*(y1,y2,y3) = (x1+y1, x2+y2, x3+y3+x1*y2-x2*y1)`.
//! The left-invariant frame is `X1 = d1 - x2 d3`, `X2 = d2 + x1 d3`, `X3 = d3`;
//! `X1, X2` span the horizontal plane and `[X1, X2] = 2 X3`.

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value of `|lambda * t|` the geodesic formulas switch to Taylor series.
pub const SMALL_ARC: f64 = 1e-4;

/// Squared planar offset under which a target counts as vertical in [`cc_shoot`].
pub const VERTICAL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl HPoint {
    pub const IDENTITY: HPoint = HPoint { x1: 0.0, x2: 0.0, x3: 0.0 };

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    /// Group product `self * other`.
    pub fn mul(&self, other: &HPoint) -> HPoint {
        HPoint { x1: self.x1 + other.x1, x2: self.x2 + other.x2, x3: self.x3 + other.x3 + self.x1 * other.x2 - self.x2 * other.x1 }
    }

    /// Group inverse; coordinatewise negation since the bilinear term is antisymmetric.
    pub fn inv(&self) -> HPoint {
        HPoint::new(-self.x1, -self.x2, -self.x3)
    }

    /// Anisotropic dilation `(r x1, r x2, r^2 x3)`.
    pub fn dilate(&self, r: f64) -> HPoint {
        HPoint::new(r * self.x1, r * self.x2, r * r * self.x3)
    }

    /// Euclidean distance in coordinates.
    pub fn euclid_dist(&self, other: &HPoint) -> f64 {
        let d = [self.x1 - other.x1, self.x2 - other.x2, self.x3 - other.x3];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    /// Translate by a cartesian displacement (not a group operation).
    pub fn offset(&self, v: [f64; 3], s: f64) -> HPoint {
        HPoint::new(self.x1 + s * v[0], self.x2 + s * v[1], self.x3 + s * v[2])
    }
}

impl Mul for HPoint {
    type Output = HPoint;
    fn mul(self, rhs: HPoint) -> HPoint {
        HPoint::mul(&self, &rhs)
    }
}

pub fn group_mul(p: HPoint, q: HPoint) -> HPoint {
    p * q
}

pub fn group_inv(p: HPoint) -> HPoint {
    p.inv()
}

/// Coefficients of a tangent vector in the frame `X1, X2, X3`.
///
/// The horizontal flag is fixed at construction: a vector is horizontal exactly
/// when its `X3` coefficient is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameVector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    horizontal: bool,
}

impl FrameVector {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c, horizontal: c == 0.0 }
    }

    pub fn horizontal(a: f64, b: f64) -> Self {
        Self { a, b, c: 0.0, horizontal: true }
    }

    pub fn is_horizontal(&self) -> bool {
        self.horizontal
    }

    pub fn g1_norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c).sqrt()
    }

    /// Sub-Riemannian length; only defined for horizontal vectors.
    pub fn g0_norm(&self) -> Option<f64> {
        self.horizontal.then(|| self.a.hypot(self.b))
    }

    pub fn g1_dot(&self, other: &FrameVector) -> f64 {
        self.a * other.a + self.b * other.b + self.c * other.c
    }

    pub fn scale(&self, s: f64) -> FrameVector {
        FrameVector::new(s * self.a, s * self.b, s * self.c)
    }

    /// Cartesian components of `a X1 + b X2 + c X3` at `p`.
    pub fn to_cartesian(&self, p: &HPoint) -> [f64; 3] {
        [self.a, self.b, -p.x2 * self.a + p.x1 * self.b + self.c]
    }

    /// Frame coefficients of a cartesian vector `v` attached at `p`.
    pub fn from_cartesian(p: &HPoint, v: [f64; 3]) -> FrameVector {
        FrameVector::new(v[0], v[1], v[2] + p.x2 * v[0] - p.x1 * v[1])
    }
}

/// The left-invariant fields at `p` as cartesian vectors `(X1, X2, X3)`.
pub fn frame_at(p: &HPoint) -> [[f64; 3]; 3] {
    [[1.0, 0.0, -p.x2], [0.0, 1.0, p.x1], [0.0, 0.0, 1.0]]
}

/// Korányi gauge `((x1^2+x2^2)^2 + 4 x3^2)^(1/4)`.
pub fn koranyi_norm(p: &HPoint) -> f64 {
    let rho2 = p.x1 * p.x1 + p.x2 * p.x2;
    (rho2 * rho2 + 4.0 * p.x3 * p.x3).sqrt().sqrt()
}

/// Normalize an angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut a = theta.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// `sin(u)/u`
pub(crate) fn sinc(u: f64) -> f64 {
    if u.abs() < SMALL_ARC {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// `(1 - cos u)/u`
pub(crate) fn cosc(u: f64) -> f64 {
    if u.abs() < SMALL_ARC {
        let u2 = u * u;
        u * (0.5 - u2 / 24.0 + u2 * u2 / 720.0)
    } else {
        (1.0 - u.cos()) / u
    }
}

/// `(u - sin u)/u^2`
pub(crate) fn vert_gap(u: f64) -> f64 {
    if u.abs() < SMALL_ARC {
        let u2 = u * u;
        u * (1.0 / 6.0 - u2 / 120.0 + u2 * u2 / 5040.0)
    } else {
        (u - u.sin()) / (u * u)
    }
}

/// Initial data of a maximal CC geodesic: base point, initial horizontal
/// direction `cos(theta) X1 + sin(theta) X2`, and signed curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicParams {
    pub base: HPoint,
    pub theta: f64,
    pub lambda: f64,
}

impl GeodesicParams {
    pub fn new(base: HPoint, theta: f64, lambda: f64) -> Self {
        Self { base, theta: wrap_angle(theta), lambda }
    }

    /// Supremum of the admissible `|t|`; infinite for straight lines.
    pub fn max_parameter(&self) -> f64 {
        if self.lambda == 0.0 {
            f64::INFINITY
        } else {
            TAU / self.lambda.abs()
        }
    }

    /// The displacement `base^-1 * gamma(t)`, without range checks.
    pub fn displacement(&self, t: f64) -> HPoint {
        let u = self.lambda * t;
        let (s, c) = (t * sinc(u), t * cosc(u));
        let (st, ct) = self.theta.sin_cos();
        HPoint::new(ct * s + st * c, -ct * c + st * s, -t * t * vert_gap(u))
    }

    /// Unit horizontal velocity at parameter `t`.
    pub fn velocity(&self, t: f64) -> FrameVector {
        let ang = self.theta - self.lambda * t;
        FrameVector::horizontal(ang.cos(), ang.sin())
    }
}

/// Point at arclength `t` on the maximal geodesic.
pub fn cc_geodesic(g: &GeodesicParams, t: f64) -> Result<HPoint> {
    let limit = g.max_parameter();
    if !(t.abs() < limit) {
        return Err(Error::ParameterOutOfRange { t, limit });
    }
    Ok(g.base * g.displacement(t))
}

/// Result of solving the endpoint problem from `p` to `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    pub params: GeodesicParams,
    pub length: f64,
}

/// `(phi - sin phi) / (4 sin^2(phi/2))`: ratio of vertical gap to squared
/// planar chord for a geodesic arc of turning angle `phi`.
fn gap_ratio(phi: f64) -> f64 {
    if phi.abs() < 1e-3 {
        let p2 = phi * phi;
        phi * (1.0 / 6.0 + p2 / 180.0)
    } else {
        let s = (0.5 * phi).sin();
        (phi - phi.sin()) / (4.0 * s * s)
    }
}

fn gap_ratio_deriv(phi: f64) -> f64 {
    if phi.abs() < 1e-3 {
        1.0 / 6.0 + phi * phi / 60.0
    } else {
        let s = (0.5 * phi).sin();
        let c = (0.5 * phi).cos();
        let num = phi - phi.sin();
        (1.0 - phi.cos()) / (4.0 * s * s) - num * c / (4.0 * s * s * s)
    }
}

/// Solve for the minimizing geodesic from `p` to `q`.
///
/// After left translation the target is `w = p^-1 * q`. Vertical targets use the
/// closed form `sqrt(2 pi |w3|)`. Otherwise the turning angle `phi = lambda t` is
/// found by bisection on `gap_ratio(phi) = -w3 / |w_h|^2` with a Newton polish;
/// the bracket `(-2pi + d, 2pi - d)` is widened through eight rungs `d = 2pi 10^-2k`.
pub fn cc_shoot(p: &HPoint, q: &HPoint) -> Result<Shot> {
    let w = p.inv() * *q;
    if !w.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite endpoints {p:?}, {q:?}")));
    }
    let rho2 = w.x1 * w.x1 + w.x2 * w.x2;
    if rho2 < VERTICAL_TOL {
        let length = (TAU * w.x3.abs()).sqrt();
        let lambda = if length == 0.0 { 0.0 } else { -w.x3.signum() * TAU / length };
        return Ok(Shot { params: GeodesicParams::new(*p, 0.0, lambda), length });
    }
    let rho = rho2.sqrt();
    let target = -w.x3 / rho2;

    let mut bracket = None;
    for k in 1..=8 {
        let hi = TAU - TAU * 10f64.powi(-2 * k);
        if gap_ratio(hi) >= target.abs() {
            bracket = Some(hi);
            break;
        }
    }
    let hi = bracket.ok_or_else(|| Error::ConvergenceFailure(format!("gap ratio {target:e} beyond the bracket ladder")))?;
    let (mut lo, mut up) = if target >= 0.0 { (0.0, hi) } else { (-hi, 0.0) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        if gap_ratio(mid) < target {
            lo = mid;
        } else {
            up = mid;
        }
        if up - lo <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
            break;
        }
    }
    let mut phi = 0.5 * (lo + up);
    for _ in 0..3 {
        let d = gap_ratio_deriv(phi);
        if d.is_finite() && d > 0.0 {
            let next = phi - (gap_ratio(phi) - target) / d;
            if next > lo - (up - lo) && next < up + (up - lo) {
                phi = next;
            }
        }
    }
    if !phi.is_finite() {
        return Err(Error::ConvergenceFailure("turning angle not finite".into()));
    }
    // chord = 2 |sin(phi/2)| / |lambda| = t |sinc(phi/2)|
    let length = rho / sinc(0.5 * phi).abs();
    let lambda = phi / length;
    let s = length * sinc(phi);
    let c = length * cosc(phi);
    // w1 + i w2 = e^{i theta} (s - i c)
    let theta = w.x2.atan2(w.x1) - (-c).atan2(s);
    Ok(Shot { params: GeodesicParams::new(*p, theta, lambda), length })
}

/// Carnot–Carathéodory distance.
pub fn cc_distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    cc_shoot(p, q).map(|s| s.length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_point(rng: &mut impl Rng, s: f64) -> HPoint {
        HPoint::new(rng.random_range(-s..s), rng.random_range(-s..s), rng.random_range(-s..s))
    }

    #[test]
    fn group_law_examples() {
        let p = HPoint::new(1.0, 2.0, 3.0);
        assert_eq!(HPoint::IDENTITY * p, p);
        assert_eq!(HPoint::new(1.0, 0.0, 0.0) * HPoint::new(0.0, 1.0, 0.0), HPoint::new(1.0, 1.0, 1.0));
        assert_eq!(group_inv(p), HPoint::new(-1.0, -2.0, -3.0));
        assert_eq!(group_inv(HPoint::IDENTITY), HPoint::IDENTITY);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = rand_point(&mut rng, 10.0);
            assert_eq!(p * p.inv(), HPoint::IDENTITY);
            assert_eq!(p.inv().inv(), p);
        }
    }

    #[test]
    fn associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (p, q, r) = (rand_point(&mut rng, 10.0), rand_point(&mut rng, 10.0), rand_point(&mut rng, 10.0));
            let a = (p * q) * r;
            let b = p * (q * r);
            assert!(a.euclid_dist(&b) <= 1e-12 * 1e2, "{a:?} {b:?}");
            for (x, y) in a.to_array().iter().zip(b.to_array()) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0) * 100.0);
            }
        }
    }

    #[test]
    fn frame_values_and_bracket() {
        assert_eq!(frame_at(&HPoint::IDENTITY), [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let f = frame_at(&HPoint::new(1.0, 2.0, 0.0));
        assert_eq!(f[0], [1.0, 0.0, -2.0]);
        assert_eq!(f[1], [0.0, 1.0, 1.0]);

        // [X, Y] = DY X - DX Y by central differences
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for _ in 0..20 {
            let p = rand_point(&mut rng, 3.0);
            let field = |q: &HPoint, k: usize| frame_at(q)[k];
            let deriv = |k: usize, dir: [f64; 3]| {
                let a = field(&p.offset(dir, h), k);
                let b = field(&p.offset(dir, -h), k);
                [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h), (a[2] - b[2]) / (2.0 * h)]
            };
            let x1 = field(&p, 0);
            let x2 = field(&p, 1);
            let d2x1 = deriv(1, x1);
            let d1x2 = deriv(0, x2);
            let br = [d2x1[0] - d1x2[0], d2x1[1] - d1x2[1], d2x1[2] - d1x2[2]];
            assert!((br[0]).abs() < 1e-8 && br[1].abs() < 1e-8 && (br[2] - 2.0).abs() < 1e-8, "{br:?}");
        }
    }

    #[test]
    fn koranyi_examples() {
        assert_eq!(koranyi_norm(&HPoint::new(1.0, 0.0, 0.0)), 1.0);
        assert!((koranyi_norm(&HPoint::new(0.0, 0.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (g, p, q) = (rand_point(&mut rng, 3.0), rand_point(&mut rng, 3.0), rand_point(&mut rng, 3.0));
            let lhs = koranyi_norm(&((g * p).inv() * (g * q)));
            let rhs = koranyi_norm(&(p.inv() * q));
            assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1.0));
            assert!((koranyi_norm(&p.inv()) - koranyi_norm(&p)).abs() < 1e-15);
        }
    }

    #[test]
    fn geodesic_examples() {
        let g = GeodesicParams::new(HPoint::IDENTITY, 0.0, 0.0);
        assert_eq!(cc_geodesic(&g, 1.0).unwrap(), HPoint::new(1.0, 0.0, 0.0));
        for theta in [0.0, 0.4, -2.0] {
            let g = GeodesicParams::new(HPoint::IDENTITY, theta, 1.0);
            let p = g.base * g.displacement(TAU);
            assert!(p.x1.abs() < 1e-12 && p.x2.abs() < 1e-12 && (p.x3 + TAU).abs() < 1e-12, "{p:?}");
            assert!(matches!(cc_geodesic(&g, TAU), Err(Error::ParameterOutOfRange { .. })));
        }
    }

    #[test]
    fn geodesic_velocity_and_unit_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = 1e-6;
        for _ in 0..100 {
            let base = rand_point(&mut rng, 2.0);
            let theta = rng.random_range(-PI..PI);
            let lambda: f64 = rng.random_range(-3.0..3.0);
            let t = rng.random_range(-1.0..1.0) * (3.0 / lambda.abs()).min(3.0);
            let g = GeodesicParams::new(base, theta, lambda);
            let a = cc_geodesic(&g, t + h).unwrap().to_array();
            let b = cc_geodesic(&g, t - h).unwrap().to_array();
            let v = [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h), (a[2] - b[2]) / (2.0 * h)];
            let at = cc_geodesic(&g, t).unwrap();
            let fv = FrameVector::from_cartesian(&at, v);
            let expect = g.velocity(t);
            assert!((fv.a - expect.a).abs() < 1e-6 && (fv.b - expect.b).abs() < 1e-6);
            assert!(fv.c.abs() < 1e-6, "vertical leak {}", fv.c);
            assert!((fv.a.hypot(fv.b) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn small_arc_branch_is_continuous() {
        let base = HPoint::new(0.3, -0.2, 0.1);
        for lambda in [1e-3, 1e-5, 1e-9] {
            let g = GeodesicParams::new(base, 0.7, lambda);
            let g2 = GeodesicParams::new(base, 0.7, lambda * (1.0 + 1e-9));
            for t in [0.05, 0.099, 0.101, 0.5] {
                let a = cc_geodesic(&g, t).unwrap();
                let b = cc_geodesic(&g2, t).unwrap();
                assert!(a.euclid_dist(&b) < 1e-12);
            }
        }
    }

    #[test]
    fn distance_examples() {
        let o = HPoint::IDENTITY;
        assert!((cc_distance(&o, &HPoint::new(2.5, 0.0, 0.0)).unwrap() - 2.5).abs() < 1e-12);
        assert!((cc_distance(&o, &HPoint::new(-0.7, 0.0, 0.0)).unwrap() - 0.7).abs() < 1e-12);
        for h in [0.01, 1.0, 3.0] {
            let d = cc_distance(&o, &HPoint::new(0.0, 0.0, h)).unwrap();
            assert!((d - (TAU * h).sqrt()).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let (p, q) = (rand_point(&mut rng, 2.0), rand_point(&mut rng, 2.0));
            let a = cc_distance(&p, &q).unwrap();
            let b = cc_distance(&q, &p).unwrap();
            assert!((a - b).abs() < 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn shot_geodesic_hits_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..300 {
            let (p, q) = (rand_point(&mut rng, 2.0), rand_point(&mut rng, 2.0));
            let shot = cc_shoot(&p, &q).unwrap();
            let end = shot.params.base * shot.params.displacement(shot.length);
            assert!(end.euclid_dist(&q) < 1e-8, "{end:?} vs {q:?}");
        }
    }

    #[test]
    fn dilation_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let (p, q) = (rand_point(&mut rng, 1.5), rand_point(&mut rng, 1.5));
            let d = cc_distance(&p, &q).unwrap();
            for r in [0.5, 2.0] {
                let dr = cc_distance(&p.dilate(r), &q.dilate(r)).unwrap();
                assert!((dr - r * d).abs() <= 1e-6 * r * d);
            }
        }
    }

    #[test]
    fn wrap_angle_range() {
        for a in [-10.0, -PI, 0.0, PI, 7.0] {
            let w = wrap_angle(a);
            assert!(w > -PI && w <= PI);
            assert!(((w - a) / TAU - ((w - a) / TAU).round()).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_vector_flags() {
        assert!(FrameVector::horizontal(1.0, 2.0).is_horizontal());
        assert!(FrameVector::new(1.0, 2.0, 0.0).is_horizontal());
        assert!(!FrameVector::new(1.0, 2.0, 1e-300).is_horizontal());
        assert_eq!(FrameVector::new(0.0, 0.0, 1.0).g0_norm(), None);
        let p = HPoint::new(0.4, -1.2, 3.0);
        let v = FrameVector::new(0.3, -0.1, 0.7);
        let back = FrameVector::from_cartesian(&p, v.to_cartesian(&p));
        assert!((back.a - v.a).abs() < 1e-15 && (back.b - v.b).abs() < 1e-15 && (back.c - v.c).abs() < 1e-15);
    }
}
