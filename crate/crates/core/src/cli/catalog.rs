//! Domains selectable from a run configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expr::{parse, Expr};
use super::CliError;
use crate::domain::{fd_gradient, fd_hessian, norm3, BBox, Cylinder, ImplicitDomain, KoranyiBall, Mat3, Vec3, VerticalSlab};
use crate::hgroup::HPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Cylinder {
        radius: f64,
        #[serde(default = "unit")]
        z_period: f64,
    },
    VerticalSlab {
        c: f64,
    },
    KoranyiBall {
        r: f64,
    },
    /// `F`, its cartesian gradient and Hessian as expressions in `x1, x2, x3`.
    Custom {
        f: String,
        grad: [String; 3],
        hess: [[String; 3]; 3],
        bbox_lo: [f64; 3],
        bbox_hi: [f64; 3],
        #[serde(default)]
        periodic: [bool; 3],
        #[serde(default)]
        reach: Option<f64>,
    },
}

fn unit() -> f64 {
    1.0
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec::Cylinder { radius: 1.0, z_period: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct ExprDomain {
    source: String,
    f: Expr,
    grad: [Expr; 3],
    hess: [[Expr; 3]; 3],
    bbox: BBox,
    periodic: [bool; 3],
    reach: Option<f64>,
}

impl ImplicitDomain for ExprDomain {
    fn name(&self) -> String {
        format!("custom({})", self.source)
    }
    fn value(&self, p: &HPoint) -> f64 {
        self.f.eval(p.to_array())
    }
    fn gradient(&self, p: &HPoint) -> Vec3 {
        let x = p.to_array();
        [0, 1, 2].map(|i| self.grad[i].eval(x))
    }
    fn hessian(&self, p: &HPoint) -> Mat3 {
        let x = p.to_array();
        [0, 1, 2].map(|i| [0, 1, 2].map(|j| self.hess[i][j].eval(x)))
    }
    fn bbox(&self) -> BBox {
        self.bbox
    }
    fn periodic_axes(&self) -> [bool; 3] {
        self.periodic
    }
    fn reach_hint(&self) -> Option<f64> {
        self.reach
    }
}

impl ExprDomain {
    /// Finite-difference consistency of the gradient and Hessian at 100 random
    /// box points, relative tolerance `1e-5`. The error names the first failing point.
    pub fn validate(&self) -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let rel = |a: Vec3, b: Vec3| {
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            norm3(d) / norm3(a).max(1.0)
        };
        for _ in 0..100 {
            let p = self.bbox.lerp([rng.random(), rng.random(), rng.random()]);
            let g = self.gradient(&p);
            let fd = fd_gradient(|q| self.value(q), &p, 1e-6);
            if !(rel(g, fd) <= 1e-5) {
                return Err(format!("gradient inconsistent with F at ({}, {}, {}): given {g:?}, finite difference {fd:?}", p.x1, p.x2, p.x3));
            }
            let h = self.hessian(&p);
            let fdh = fd_hessian(|q| self.gradient(q), &p, 1e-5);
            for i in 0..3 {
                if !(rel(h[i], fdh[i]) <= 1e-5) {
                    return Err(format!(
                        "Hessian row {i} inconsistent with gradient at ({}, {}, {}): given {:?}, finite difference {:?}",
                        p.x1, p.x2, p.x3, h[i], fdh[i]
                    ));
                }
            }
        }
        Ok(())
    }
}

fn compile(what: &str, s: &str) -> Result<Expr, CliError> {
    parse(s).map_err(|e| CliError::Config(format!("{what} = {s:?}: {e}")))
}

pub fn build_domain(spec: &DomainSpec) -> Result<Box<dyn ImplicitDomain>, CliError> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Config(format!("domain parameter {name} must be positive, got {v}")))
        }
    };
    Ok(match spec {
        DomainSpec::Cylinder { radius, z_period } => Box::new(Cylinder::new(positive("radius", *radius)?, positive("z_period", *z_period)?)),
        DomainSpec::VerticalSlab { c } => Box::new(VerticalSlab { c: positive("c", *c)? }),
        DomainSpec::KoranyiBall { r } => Box::new(KoranyiBall { r: positive("r", *r)? }),
        DomainSpec::Custom { f, grad, hess, bbox_lo, bbox_hi, periodic, reach } => {
            if (0..3).any(|k| !(bbox_hi[k] > bbox_lo[k])) {
                return Err(CliError::Config(format!("custom bbox must satisfy lo < hi, got {bbox_lo:?} .. {bbox_hi:?}")));
            }
            let axes = ["x1", "x2", "x3"];
            let grad = [0, 1, 2].map(|i| compile(&format!("grad[{}]", axes[i]), &grad[i]));
            let grad = [grad[0].clone()?, grad[1].clone()?, grad[2].clone()?];
            let mut h: Vec<Expr> = Vec::with_capacity(9);
            for i in 0..3 {
                for j in 0..3 {
                    h.push(compile(&format!("hess[{i}][{j}]"), &hess[i][j])?);
                }
            }
            let dom = ExprDomain {
                source: f.clone(),
                f: compile("f", f)?,
                grad,
                hess: [0, 1, 2].map(|i| [0, 1, 2].map(|j| h[3 * i + j].clone())),
                bbox: BBox::new(*bbox_lo, *bbox_hi),
                periodic: *periodic,
                reach: *reach,
            };
            dom.validate().map_err(CliError::Validation)?;
            Box::new(dom)
        }
    })
}
