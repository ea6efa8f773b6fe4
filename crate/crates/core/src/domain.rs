//! Implicit domains `{F < 0}` with exact first and second derivatives.

use crate::hgroup::HPoint;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Axis-aligned box. On periodic axes the extent is one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl BBox {
    pub fn new(lo: Vec3, hi: Vec3) -> Self {
        Self { lo, hi }
    }

    pub fn extent(&self) -> Vec3 {
        [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1], self.hi[2] - self.lo[2]]
    }

    pub fn diameter(&self) -> f64 {
        let e = self.extent();
        (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt()
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e[0] * e[1] * e[2]
    }

    pub fn contains(&self, p: &HPoint) -> bool {
        let a = p.to_array();
        (0..3).all(|k| a[k] >= self.lo[k] && a[k] <= self.hi[k])
    }

    /// Point at fractional coordinates `u` in `[0,1]^3`.
    pub fn lerp(&self, u: Vec3) -> HPoint {
        HPoint::new(
            self.lo[0] + u[0] * (self.hi[0] - self.lo[0]),
            self.lo[1] + u[1] * (self.hi[1] - self.lo[1]),
            self.lo[2] + u[2] * (self.hi[2] - self.lo[2]),
        )
    }

    fn corners(&self) -> impl Iterator<Item = HPoint> + '_ {
        (0..8).map(move |m| {
            HPoint::new(
                if m & 1 == 0 { self.lo[0] } else { self.hi[0] },
                if m & 2 == 0 { self.lo[1] } else { self.hi[1] },
                if m & 4 == 0 { self.lo[2] } else { self.hi[2] },
            )
        })
    }

    fn hull(points: impl Iterator<Item = HPoint>) -> BBox {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for (k, v) in p.to_array().into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        BBox { lo, hi }
    }
}

/// A domain `Omega = {F < 0}` with `F` smooth and `grad F != 0` near `{F = 0}`.
///
/// `bbox` contains `Omega`, or one period of it on the axes flagged by
/// `periodic_axes`; geometric integrals are then reported per period.
pub trait ImplicitDomain: Send + Sync {
    fn name(&self) -> String;
    fn value(&self, p: &HPoint) -> f64;
    fn gradient(&self, p: &HPoint) -> Vec3;
    fn hessian(&self, p: &HPoint) -> Mat3;
    fn bbox(&self) -> BBox;

    fn periodic_axes(&self) -> [bool; 3] {
        [false; 3]
    }

    /// A lower bound on the reach of the boundary, when known analytically.
    fn reach_hint(&self) -> Option<f64> {
        None
    }

    fn contains(&self, p: &HPoint) -> bool {
        self.value(p) < 0.0
    }
}

impl<D: ImplicitDomain + ?Sized> ImplicitDomain for Box<D> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn value(&self, p: &HPoint) -> f64 {
        (**self).value(p)
    }
    fn gradient(&self, p: &HPoint) -> Vec3 {
        (**self).gradient(p)
    }
    fn hessian(&self, p: &HPoint) -> Mat3 {
        (**self).hessian(p)
    }
    fn bbox(&self) -> BBox {
        (**self).bbox()
    }
    fn periodic_axes(&self) -> [bool; 3] {
        (**self).periodic_axes()
    }
    fn reach_hint(&self) -> Option<f64> {
        (**self).reach_hint()
    }
}

pub fn norm3(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Central-difference gradient; a test and validation oracle only.
pub fn fd_gradient(f: impl Fn(&HPoint) -> f64, p: &HPoint, h: f64) -> Vec3 {
    let mut g = [0.0; 3];
    for (k, gk) in g.iter_mut().enumerate() {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        *gk = (f(&p.offset(e, h)) - f(&p.offset(e, -h))) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian of a scalar field via differences of its gradient.
pub fn fd_hessian(grad: impl Fn(&HPoint) -> Vec3, p: &HPoint, h: f64) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        let a = grad(&p.offset(e, h));
        let b = grad(&p.offset(e, -h));
        for i in 0..3 {
            m[i][j] = (a[i] - b[i]) / (2.0 * h);
        }
    }
    m
}

/// Vertical cylinder `x1^2 + x2^2 < R^2`, periodic in `x3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub radius: f64,
    pub z_period: f64,
}

impl Cylinder {
    pub fn new(radius: f64, z_period: f64) -> Self {
        Self { radius, z_period }
    }
}

impl ImplicitDomain for Cylinder {
    fn name(&self) -> String {
        format!("cylinder(R={}, z_period={})", self.radius, self.z_period)
    }
    // Scaled by 1/(2R) so that |grad F| = 1 on the boundary.
    fn value(&self, p: &HPoint) -> f64 {
        (p.x1 * p.x1 + p.x2 * p.x2 - self.radius * self.radius) / (2.0 * self.radius)
    }
    fn gradient(&self, p: &HPoint) -> Vec3 {
        [p.x1 / self.radius, p.x2 / self.radius, 0.0]
    }
    fn hessian(&self, _p: &HPoint) -> Mat3 {
        let k = 1.0 / self.radius;
        [[k, 0.0, 0.0], [0.0, k, 0.0], [0.0, 0.0, 0.0]]
    }
    fn bbox(&self) -> BBox {
        let m = 1.1 * self.radius;
        BBox::new([-m, -m, 0.0], [m, m, self.z_period])
    }
    fn periodic_axes(&self) -> [bool; 3] {
        [false, false, true]
    }
    fn reach_hint(&self) -> Option<f64> {
        Some(self.radius)
    }
}

/// Slab `|x1| < c`, periodic in `x2` and `x3` with unit periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalSlab {
    pub c: f64,
}

impl ImplicitDomain for VerticalSlab {
    fn name(&self) -> String {
        format!("vertical_slab(c={})", self.c)
    }
    fn value(&self, p: &HPoint) -> f64 {
        (p.x1 * p.x1 - self.c * self.c) / (2.0 * self.c)
    }
    fn gradient(&self, p: &HPoint) -> Vec3 {
        [p.x1 / self.c, 0.0, 0.0]
    }
    fn hessian(&self, _p: &HPoint) -> Mat3 {
        [[1.0 / self.c, 0.0, 0.0], [0.0; 3], [0.0; 3]]
    }
    fn bbox(&self) -> BBox {
        let m = 1.1 * self.c;
        BBox::new([-m, 0.0, 0.0], [m, 1.0, 1.0])
    }
    fn periodic_axes(&self) -> [bool; 3] {
        [false, true, true]
    }
    fn reach_hint(&self) -> Option<f64> {
        Some(self.c)
    }
}

/// Half-space `x1 < c`; the box is a unit window on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub c: f64,
}

impl ImplicitDomain for HalfSpace {
    fn name(&self) -> String {
        format!("half_space(c={})", self.c)
    }
    fn value(&self, p: &HPoint) -> f64 {
        p.x1 - self.c
    }
    fn gradient(&self, _p: &HPoint) -> Vec3 {
        [1.0, 0.0, 0.0]
    }
    fn hessian(&self, _p: &HPoint) -> Mat3 {
        [[0.0; 3]; 3]
    }
    fn bbox(&self) -> BBox {
        BBox::new([self.c - 1.0, 0.0, 0.0], [self.c + 0.5, 1.0, 1.0])
    }
    fn periodic_axes(&self) -> [bool; 3] {
        [false, true, true]
    }
    fn reach_hint(&self) -> Option<f64> {
        Some(f64::INFINITY)
    }
}

/// Korányi ball `(x1^2+x2^2)^2 + 4 x3^2 < r^4`; characteristic at `(0,0,±r^2/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KoranyiBall {
    pub r: f64,
}

impl ImplicitDomain for KoranyiBall {
    fn name(&self) -> String {
        format!("koranyi_ball(r={})", self.r)
    }
    fn value(&self, p: &HPoint) -> f64 {
        let rho2 = p.x1 * p.x1 + p.x2 * p.x2;
        rho2 * rho2 + 4.0 * p.x3 * p.x3 - self.r.powi(4)
    }
    fn gradient(&self, p: &HPoint) -> Vec3 {
        let rho2 = p.x1 * p.x1 + p.x2 * p.x2;
        [4.0 * rho2 * p.x1, 4.0 * rho2 * p.x2, 8.0 * p.x3]
    }
    fn hessian(&self, p: &HPoint) -> Mat3 {
        let rho2 = p.x1 * p.x1 + p.x2 * p.x2;
        let h12 = 8.0 * p.x1 * p.x2;
        [[4.0 * rho2 + 8.0 * p.x1 * p.x1, h12, 0.0], [h12, 4.0 * rho2 + 8.0 * p.x2 * p.x2, 0.0], [0.0, 0.0, 8.0]]
    }
    fn bbox(&self) -> BBox {
        let m = 1.1 * self.r;
        let h = 0.55 * self.r * self.r;
        BBox::new([-m, -m, -h], [m, m, h])
    }
}

/// Euclidean ball `|p - center| < radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanBall {
    pub center: HPoint,
    pub radius: f64,
}

impl ImplicitDomain for EuclideanBall {
    fn name(&self) -> String {
        format!("euclidean_ball(c={:?}, r={})", self.center.to_array(), self.radius)
    }
    fn value(&self, p: &HPoint) -> f64 {
        let d = [p.x1 - self.center.x1, p.x2 - self.center.x2, p.x3 - self.center.x3];
        (dot3(d, d) - self.radius * self.radius) / (2.0 * self.radius)
    }
    fn gradient(&self, p: &HPoint) -> Vec3 {
        let r = self.radius;
        [(p.x1 - self.center.x1) / r, (p.x2 - self.center.x2) / r, (p.x3 - self.center.x3) / r]
    }
    fn hessian(&self, _p: &HPoint) -> Mat3 {
        let k = 1.0 / self.radius;
        [[k, 0.0, 0.0], [0.0, k, 0.0], [0.0, 0.0, k]]
    }
    fn bbox(&self) -> BBox {
        let m = 1.1 * self.radius;
        let c = self.center.to_array();
        BBox::new([c[0] - m, c[1] - m, c[2] - m], [c[0] + m, c[1] + m, c[2] + m])
    }
}

/// Derivatives of `F(m(p))` for a polynomial map `m` with Jacobian `a`, given `q = m(p)`.
/// `sel` selects how many derivative orders to compute.
fn pull_back(inner: &dyn ImplicitDomain, a: &Mat3, q: &HPoint, sel: u8) -> (f64, Vec3, Mat3) {
    let g = if sel >= 1 { inner.gradient(q) } else { [0.0; 3] };
    let mut grad = [0.0; 3];
    for j in 0..3 {
        grad[j] = (0..3).map(|i| a[i][j] * g[i]).sum();
    }
    let mut hess = [[0.0; 3]; 3];
    if sel >= 2 {
        let h = inner.hessian(q);
        for j in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for i in 0..3 {
                    for l in 0..3 {
                        s += a[i][j] * h[i][l] * a[l][k];
                    }
                }
                hess[j][k] = s;
            }
        }
    }
    (inner.value(q), grad, hess)
}

/// The left translate `g * Omega`, i.e. `F'(p) = F(g^-1 * p)`.
pub struct LeftTranslated<D> {
    pub inner: D,
    pub g: HPoint,
}

impl<D: ImplicitDomain> LeftTranslated<D> {
    pub fn new(inner: D, g: HPoint) -> Self {
        Self { inner, g }
    }
    // d(g^-1 * p)/dp
    fn jac(&self) -> Mat3 {
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [self.g.x2, -self.g.x1, 1.0]]
    }
    fn pre(&self, p: &HPoint) -> HPoint {
        self.g.inv() * *p
    }
}

impl<D: ImplicitDomain> ImplicitDomain for LeftTranslated<D> {
    fn name(&self) -> String {
        format!("{:?} * {}", self.g.to_array(), self.inner.name())
    }
    fn value(&self, p: &HPoint) -> f64 {
        self.inner.value(&self.pre(p))
    }
    fn gradient(&self, p: &HPoint) -> Vec3 {
        pull_back(&self.inner, &self.jac(), &self.pre(p), 1).1
    }
    fn hessian(&self, p: &HPoint) -> Mat3 {
        pull_back(&self.inner, &self.jac(), &self.pre(p), 2).2
    }
    fn bbox(&self) -> BBox {
        BBox::hull(self.inner.bbox().corners().map(|c| self.g * c))
    }
    fn reach_hint(&self) -> Option<f64> {
        self.inner.reach_hint()
    }
}

/// The dilate `delta_r(Omega)`, i.e. `F'(p) = F(delta_{1/r} p)`.
pub struct Dilated<D> {
    pub inner: D,
    pub r: f64,
}

impl<D: ImplicitDomain> Dilated<D> {
    pub fn new(inner: D, r: f64) -> Self {
        Self { inner, r }
    }
    fn jac(&self) -> Mat3 {
        let s = 1.0 / self.r;
        [[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s * s]]
    }
}

impl<D: ImplicitDomain> ImplicitDomain for Dilated<D> {
    fn name(&self) -> String {
        format!("dilate({}, {})", self.r, self.inner.name())
    }
    fn value(&self, p: &HPoint) -> f64 {
        self.inner.value(&p.dilate(1.0 / self.r))
    }
    fn gradient(&self, p: &HPoint) -> Vec3 {
        pull_back(&self.inner, &self.jac(), &p.dilate(1.0 / self.r), 1).1
    }
    fn hessian(&self, p: &HPoint) -> Mat3 {
        pull_back(&self.inner, &self.jac(), &p.dilate(1.0 / self.r), 2).2
    }
    fn bbox(&self) -> BBox {
        let b = self.inner.bbox();
        BBox::hull(b.corners().map(|c| c.dilate(self.r)))
    }
    fn periodic_axes(&self) -> [bool; 3] {
        self.inner.periodic_axes()
    }
    fn reach_hint(&self) -> Option<f64> {
        self.inner.reach_hint().map(|r| r * self.r)
    }
}
