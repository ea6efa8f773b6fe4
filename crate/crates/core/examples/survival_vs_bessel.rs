//! Survival probabilities in the vertical cylinder against the planar disk,
//! whose Bessel series is exact because the cylinder only sees `(x1, x2)`.

use hheat::domain::Cylinder;
use hheat::heatmc::disk::disk_survival;
use hheat::heatmc::{estimate_survival_grid, SimConfig};
use hheat::hgroup::HPoint;

fn main() -> Result<(), hheat::error::Error> {
    let cyl = Cylinder::new(1.0, 1.0);
    let ts = [0.02, 0.05, 0.1];
    let cfg = SimConfig { n_paths: 20_000, n_steps: 256, n_substeps: 8, seed: 1, bridge: true };
    println!("{:>5} {:>6} {:>10} {:>10} {:>10} {:>7}", "rho", "t", "p_hat", "std_err", "exact", "z");
    for rho in [0.3, 0.6, 0.9] {
        for e in estimate_survival_grid(&cyl, &HPoint::new(rho, 0.0, 0.2), &ts, &cfg)? {
            let exact = disk_survival(rho, e.t, 1.0);
            let z = if e.std_err > 0.0 { (e.p_hat - exact) / e.std_err } else { 0.0 };
            println!("{rho:>5} {:>6} {:>10.6} {:>10.2e} {exact:>10.6} {z:>7.2}", e.t, e.p_hat, e.std_err);
        }
    }
    Ok(())
}
