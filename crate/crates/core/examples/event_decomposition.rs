//! Event decomposition of the boundary layer at the argmax time of `B^N`, with
//! log-log slopes of the two residual events.

use hheat::domain::Cylinder;
use hheat::heatmc::{build_shell, decompose_events, ShellEps, ShellOptions, SimConfig};
use hheat::stats::loglog_slope;
use hheat::surfgeom::SurfaceQuadrature;

fn main() -> Result<(), hheat::error::Error> {
    let cyl = Cylinder::new(1.0, 1.0);
    let ts = [0.005, 0.01, 0.02, 0.04];
    let quad = SurfaceQuadrature::build(&cyl, 3)?;
    let opts = ShellOptions { surface_nodes: 4, ..ShellOptions::for_times(&ts) };
    let layout = build_shell(&cyl, &quad, ShellEps::Auto, 0.04, &opts)?;
    let cfg = SimConfig { n_paths: 1000, n_steps: 256, n_substeps: 2, seed: 3, bridge: false };
    let mut rows = Vec::new();
    for &t in &ts {
        let d = decompose_events(&cyl, &layout, t, &cfg, None)?;
        println!(
            "t = {t:<6} I1 {:.5}  I2 {:.5}  I3 {:.5}  Q' {:.5}  res(tau < T' <= t) {:.2e}  res(T' <= tau, in) {:.2e}  identity {}",
            d.i1,
            d.i2,
            d.i3,
            d.q_prime,
            d.residual_tau_t,
            d.residual_t_tau_in,
            d.identity_holds()
        );
        rows.push(d);
    }
    let t: Vec<f64> = rows.iter().map(|d| d.t).collect();
    let s1 = loglog_slope(&t, &rows.iter().map(|d| d.residual_tau_t).collect::<Vec<_>>());
    let s2 = loglog_slope(&t, &rows.iter().map(|d| d.residual_t_tau_in).collect::<Vec<_>>());
    println!("slopes: {:.2} +- {:.2} and {:.2} +- {:.2}", s1.0, s1.1, s2.0, s2.1);
    Ok(())
}
