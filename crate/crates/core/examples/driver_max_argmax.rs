//! The planar driver and its Levy area, the running maximum and its argmax on
//! the grid and under Brownian-bridge interpolation, and the exact sampler.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hheat::driver::{bridge_max_stats, joint_density_phi, max_stats, sample_driver, sample_max_argmax, PathConfig};
use hheat::rng::{stream, Purpose};
use hheat::stats::{arcsine_cdf, half_normal_cdf, ks_statistic, mean_se};

fn main() -> Result<(), hheat::error::Error> {
    let t = 1.0;
    let n = 20_000u64;
    let pc = PathConfig::new(t, 256, 4, 7, 0)?;
    let mut grid = (Vec::new(), Vec::new());
    let mut bridge = (Vec::new(), Vec::new());
    let mut area = Vec::new();
    for i in 0..n {
        let path = sample_driver(&pc.with_index(i));
        let g = max_stats(&path);
        let b = bridge_max_stats(&path, &mut stream(7, Purpose::Auxiliary(0), i));
        grid.0.push(g.xi);
        grid.1.push(g.tau);
        bridge.0.push(b.xi);
        bridge.1.push(b.tau);
        area.push(path.a[path.len() - 1].powi(2));
    }
    let (a2, se) = mean_se(&area);
    println!("E[A_t^2] = {a2:.4} +- {se:.4} (exact t^2 = {})", t * t);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let exact: (Vec<f64>, Vec<f64>) = (0..n).map(|_| sample_max_argmax(&mut rng, t)).unzip();
    println!("\nKS distances to the half-normal (max) and arcsine (argmax) laws:");
    for (name, (xi, tau)) in [("grid maximum", &grid), ("bridge maximum", &bridge), ("exact sampler", &exact)] {
        let (m, _) = mean_se(xi);
        println!(
            "  {name:<15} KS xi {:.4}  KS tau {:.4}  mean max {m:.4} (exact {:.4})",
            ks_statistic(xi, |x| half_normal_cdf(x, t)),
            ks_statistic(tau, |x| arcsine_cdf(x, t)),
            (2.0 * t / std::f64::consts::PI).sqrt()
        );
    }
    println!("\njoint density at (xi, tau) = (0.8, 0.5): {:.6}", joint_density_phi(0.8, 0.5, t));
    Ok(())
}
