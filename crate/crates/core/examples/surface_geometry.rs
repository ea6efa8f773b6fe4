//! Horizontal perimeter, horizontal mean curvature and characteristic points of
//! implicit boundaries, and the coefficients they predict for the heat content.

use hheat::domain::{Cylinder, EuclideanBall, ImplicitDomain, KoranyiBall};
use hheat::heatmc::predicted_coefficients;
use hheat::hgroup::HPoint;
use hheat::surfgeom::{characteristic_scan, horizontal_perimeter, volume, SurfaceQuadrature, CHAR_TOL};

fn report(dom: &dyn ImplicitDomain) -> Result<(), hheat::error::Error> {
    let quad = SurfaceQuadrature::build(dom, 3)?;
    let scan = characteristic_scan(dom, &quad, CHAR_TOL);
    let vol = volume(dom);
    println!("{}", dom.name());
    println!("  volume {:.6} +- {:.1e}, sigma0 {:.6}", vol.value, vol.est_error, horizontal_perimeter(&quad));
    if !scan.is_clean() {
        for s in &scan.flagged {
            println!("  characteristic point ({:+.5}, {:+.5}, {:+.5})", s.p.x1, s.p.x2, s.p.x3);
        }
        return Ok(());
    }
    let pred = predicted_coefficients(dom, &quad)?;
    println!("  int H dsigma0 {:.6}", pred.total_mean_curvature);
    println!("  Q(t) ~ {:.5} - {:.5} sqrt(t) + {:.5} t", pred.c0, pred.c1, pred.c2);
    Ok(())
}

fn main() -> Result<(), hheat::error::Error> {
    // one period of the unit cylinder: pi - 2 sqrt(2 pi) sqrt(t) + (pi / 2) t
    report(&Cylinder::new(1.0, 1.0))?;
    report(&Cylinder::new(0.5, 1.0))?;
    // Euclidean and Koranyi balls both have characteristic poles
    report(&EuclideanBall { center: HPoint::new(0.0, 0.0, 0.0), radius: 1.0 })?;
    report(&KoranyiBall { r: 1.0 })?;
    Ok(())
}
