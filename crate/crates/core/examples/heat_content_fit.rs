//! Heat content of one period of the unit cylinder over a boundary shell, and
//! the fitted expansion `c0 - c1 sqrt(t) + c2 t` against its geometric prediction.
//!
//! `cargo run --release --example heat_content_fit -- 20000` sets the paths per node.

use hheat::domain::Cylinder;
use hheat::heatmc::disk::disk_heat_content;
use hheat::heatmc::{estimate_heat_content, fit_expansion, predicted_coefficients, ShellEps, SimConfig};
use hheat::surfgeom::SurfaceQuadrature;

fn main() -> Result<(), hheat::error::Error> {
    let paths = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    let cyl = Cylinder::new(1.0, 1.0);
    let ts = [0.0025, 0.005, 0.01, 0.02, 0.04];
    let cfg = SimConfig { n_paths: paths, n_steps: 256, n_substeps: 8, seed: 2, bridge: true };
    let est = estimate_heat_content(&cyl, &ts, ShellEps::Auto, &cfg)?;
    println!("{} shell nodes of width {}, {paths} paths each", est[0].n_shell_nodes, est[0].shell_eps);
    for e in &est {
        println!("t = {:<7} Q = {:.6} +- {:.1e}   exact disk {:.6}", e.t, e.q_hat, e.std_err, disk_heat_content(e.t, 1.0));
    }
    let fit = fit_expansion(&est)?;
    let pred = predicted_coefficients(&cyl, &SurfaceQuadrature::build(&cyl, 3)?)?;
    let se = fit.std_errs();
    for (i, (name, p)) in [("c0", pred.c0), ("c1", pred.c1), ("c2", pred.c2)].into_iter().enumerate() {
        let c = fit.coefficients()[i];
        println!("{name}: fitted {c:.5} +- {:.5}, predicted {p:.5}, z = {:.2}", se[i], (c - p) / se[i]);
    }
    Ok(())
}
