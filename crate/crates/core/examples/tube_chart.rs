//! Geodesic normal charts: the closed-form map, its inverse and Jacobian, the
//! boundary graph expansion, and the tube Jacobian against the annulus ratio.

use hheat::domain::{Cylinder, EuclideanBall, ImplicitDomain};
use hheat::hgroup::HPoint;
use hheat::surfgeom::{g1_normal, horizontal_mean_curvature};
use hheat::tubechart::{h_expansion, phi, phi_inverse, phi_jacobian_det, tube_jacobian, tube_point_psi, ChartCoords, GeodesicChart};

fn main() -> Result<(), hheat::error::Error> {
    let ball = EuclideanBall { center: HPoint::new(0.1, -0.2, 0.05), radius: 1.0 };
    let (polar, azimuth) = (1.1f64, 0.4f64);
    let on_sphere = HPoint::new(0.1 + polar.sin() * azimuth.cos(), -0.2 + polar.sin() * azimuth.sin(), 0.05 + polar.cos());
    let s = g1_normal(&ball, &on_sphere)?;
    let r = 0.15;
    let chart = GeodesicChart::from_boundary(&ball, &s, r)?;
    println!("chart at distance {r} from the boundary: theta {:.4}, lambda {:.4}", chart.theta, chart.lambda);

    let c = ChartCoords::new(0.05, -0.1, 0.02);
    let x = phi(&chart, &c)?;
    let back = phi_inverse(&chart, &x)?;
    println!("phi{:?} = {:?}", (c.xi, c.y, c.z), x);
    println!("inverse round trip error {:.2e}", ((back.xi - c.xi).abs()).max((back.y - c.y).abs()).max((back.z - c.z).abs()));
    println!("Jacobian determinant {:.8}", phi_jacobian_det(chart.lambda, c.y));
    let foot = chart.phi_unchecked(&ChartCoords::new(r, 0.0, 0.0));
    println!("phi(r, 0, 0) lands on the boundary: F = {:.2e}", ball.value(&foot));

    let e = h_expansion(&ball, &chart)?;
    let h = horizontal_mean_curvature(&ball, &s)?;
    println!("boundary graph: h_yy / 2 = {:.6}, H / 2 = {:.6}, h_z = {:.4}", e.half_h, 0.5 * h, e.k1);

    let cyl = Cylinder::new(1.0, 1.0);
    let s = g1_normal(&cyl, &HPoint::new(0.6, 0.8, 0.3))?;
    println!("\ncylinder: J(s, r) against the annulus ratio 1 - r");
    for r in [0.0, 0.1, 0.3, 0.6] {
        let x = tube_point_psi(&cyl, &s, r)?;
        println!("r = {r:.1}  Psi = ({:.4}, {:.4}, {:.4})  J = {:.10}", x.x1, x.x2, x.x3, tube_jacobian(&cyl, &s, r)?);
    }
    Ok(())
}
