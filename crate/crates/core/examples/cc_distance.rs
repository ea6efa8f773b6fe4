//! Carnot-Caratheodory distance by geodesic shooting, compared with the Koranyi gauge.

use hheat::hgroup::{cc_distance, cc_shoot, koranyi_norm, HPoint};

fn main() -> Result<(), hheat::error::Error> {
    let o = HPoint::IDENTITY;
    println!("{:>28}  {:>10}  {:>10}  {:>8}  {:>10}", "target", "d_cc", "|x|_K", "ratio", "lambda");
    for q in [
        HPoint::new(1.0, 0.0, 0.0),
        HPoint::new(3.0, 4.0, 0.0),
        HPoint::new(0.0, 0.0, 1.0),
        HPoint::new(0.5, -0.2, 0.3),
        HPoint::new(-1.0, 1.0, -2.0),
    ] {
        let shot = cc_shoot(&o, &q)?;
        let d = shot.length;
        let k = koranyi_norm(&q);
        println!("{:>28}  {d:>10.6}  {k:>10.6}  {:>8.4}  {:>10.4}", format!("({}, {}, {})", q.x1, q.x2, q.x3), d / k, shot.params.lambda);
    }
    // left invariance: d(g p, g q) = d(p, q)
    let (p, q, g) = (HPoint::new(0.2, 0.1, 0.0), HPoint::new(-0.4, 0.3, 0.5), HPoint::new(3.0, -1.0, 7.0));
    println!("\nd(p, q) = {:.12}, d(gp, gq) = {:.12}", cc_distance(&p, &q)?, cc_distance(&(g * p), &(g * q))?);
    Ok(())
}
