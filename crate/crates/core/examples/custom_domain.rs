//! A domain given by expression strings, as in a run configuration: an
//! elliptic cylinder, checked for finite-difference consistency, then measured.

use hheat::cli::catalog::{build_domain, DomainSpec};
use hheat::heatmc::predicted_coefficients;
use hheat::surfgeom::SurfaceQuadrature;

fn main() {
    let spec: DomainSpec = toml::from_str(
        r#"
kind = "custom"
f = "(x1^2 / 1.44 + x2^2 / 0.64 - 1) / 2"
grad = ["x1 / 1.44", "x2 / 0.64", "0"]
hess = [["1 / 1.44", "0", "0"], ["0", "1 / 0.64", "0"], ["0", "0", "0"]]
bbox_lo = [-1.3, -0.9, 0.0]
bbox_hi = [1.3, 0.9, 1.0]
periodic = [false, false, true]
"#,
    )
    .expect("valid spec");
    let dom = match build_domain(&spec) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    let quad = SurfaceQuadrature::build(&dom, 3).expect("quadrature");
    let pred = predicted_coefficients(&dom, &quad).expect("noncharacteristic");
    // ellipse with semi-axes 1.2 and 0.8: area pi ab, and int kappa = 2 pi
    println!("volume {:.6} (pi ab = {:.6})", pred.c0, std::f64::consts::PI * 1.2 * 0.8);
    println!("sigma0 {:.6}, int H dsigma0 {:.6} (2 pi = {:.6})", pred.sigma0, pred.total_mean_curvature, 2.0 * std::f64::consts::PI);
    println!("Q(t) ~ {:.5} - {:.5} sqrt(t) + {:.5} t", pred.c0, pred.c1, pred.c2);

    let mut broken = spec.clone();
    if let DomainSpec::Custom { grad, .. } = &mut broken {
        grad[1] = "x2".into();
    }
    match build_domain(&broken) {
        Err(e) => println!("\nwith a wrong gradient: {e}"),
        Ok(_) => println!("\nwrong gradient was not detected"),
    }
}
