//! Group law, dilations, the Koranyi gauge and points along CC geodesics.

use std::f64::consts::PI;

use hheat::hgroup::{cc_geodesic, koranyi_norm, GeodesicParams, HPoint};

fn main() -> Result<(), hheat::error::Error> {
    let p = HPoint::new(1.0, 0.5, -0.25);
    let q = HPoint::new(-0.3, 2.0, 0.7);
    println!("p * q         = {:?}", p * q);
    println!("q * p         = {:?}", q * p);
    println!("p * p^-1      = {:?}", p * p.inv());
    println!("|p|_K         = {:.6}", koranyi_norm(&p));
    println!("|delta_2 p|_K = {:.6} (twice the above)", koranyi_norm(&p.dilate(2.0)));

    // A geodesic of curvature lambda closes its planar projection after length 2 pi / |lambda|.
    let g = GeodesicParams::new(HPoint::IDENTITY, 0.0, 2.0);
    println!("\nlambda = 2, maximal length {:.6}", g.max_parameter());
    for k in 0..=6 {
        let t = 0.95 * g.max_parameter() * k as f64 / 6.0;
        let x = cc_geodesic(&g, t)?;
        println!("t = {t:.4}  x = ({:+.6}, {:+.6}, {:+.6})", x.x1, x.x2, x.x3);
    }
    let full = g.base * g.displacement(PI);
    println!("endpoint after one loop: x3 = {:.6} (enclosed area pi / lambda^2 = {:.6}, doubled)", full.x3, PI / 4.0);
    Ok(())
}
