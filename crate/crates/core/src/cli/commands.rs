//! Command bodies. Each writes its CSV outputs and a `<command>.manifest.json`
//! into the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::catalog::build_domain;
use super::config::RunConfig;
use super::csvout::{self, num, Table};
use super::validate::{render_table, run_checks};
use super::{CliError, Command, GlobalArgs};
use crate::domain::ImplicitDomain;
use crate::heatmc::{build_shell, decompose_events, fit_expansion, heat_content, predicted_coefficients, probe_reach, ShellLayout, ShellOptions};
use crate::stats::loglog_slope;
use crate::surfgeom::{characteristic_scan, horizontal_perimeter, volume, SurfaceQuadrature, CHAR_TOL};

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a RunConfig,
    seed: u64,
    versions: Versions,
    outputs: Vec<String>,
    exit_code: i32,
    error: Option<String>,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct Versions {
    hheat: &'static str,
    csv_schema: u32,
}

/// Output files written so far by a command.
struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Outputs { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn table(&mut self, name: &str, t: &Table) -> Result<(), CliError> {
        t.write(&self.dir.join(name))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, s: &str) -> Result<(), CliError> {
        let p = self.dir.join(name);
        std::fs::write(&p, s).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

pub fn execute(cmd: Command, args: &GlobalArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = RunConfig::load(args.config.as_deref(), &args.overrides())?;
    let mut out = Outputs::new(&cfg.output_dir)?;
    let result = match cmd {
        Command::Geom => cmd_geom(&cfg, &mut out),
        Command::Heat => cmd_heat(&cfg, &mut out),
        Command::Fit => {
            let input = args.input.clone().unwrap_or_else(|| cfg.output_dir.join("heat.csv"));
            cmd_fit(&cfg, &input, &mut out)
        }
        Command::Diag => cmd_diag(&cfg, &mut out),
        Command::Validate => cmd_validate(&cfg, args.filter.as_deref(), &mut out),
    };
    let manifest = Manifest {
        command: cmd.name(),
        config: &cfg,
        seed: cfg.seed,
        versions: Versions { hheat: env!("CARGO_PKG_VERSION"), csv_schema: 1 },
        outputs: out.written.clone(),
        exit_code: result.as_ref().map_or_else(|e| e.exit_code(), |_| 0),
        error: result.as_ref().err().map(|e| e.to_string()),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    let path = cfg.output_dir.join(format!("{}.manifest.json", cmd.name()));
    std::fs::write(&path, json + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    result
}

fn geometry(cfg: &RunConfig) -> Result<(Box<dyn ImplicitDomain>, SurfaceQuadrature), CliError> {
    let dom = build_domain(&cfg.domain)?;
    let quad = SurfaceQuadrature::build(&dom, cfg.quadrature_level)?;
    Ok((dom, quad))
}

fn shell(cfg: &RunConfig, dom: &dyn ImplicitDomain, quad: &SurfaceQuadrature) -> Result<ShellLayout, CliError> {
    let mut opts = ShellOptions::for_times(&cfg.t_grid);
    opts.surface_nodes = cfg.surface_nodes;
    opts.quadrature_level = cfg.quadrature_level;
    Ok(build_shell(dom, quad, cfg.shell_eps.to_shell_eps(), cfg.t_max(), &opts)?)
}

fn cmd_geom(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let (dom, quad) = geometry(cfg)?;
    let scan = characteristic_scan(&dom, &quad, CHAR_TOL);
    let mut pts = Table::new(&["x1", "x2", "x3", "nh_norm"]);
    for s in &scan.flagged {
        pts.push(vec![num(s.p.x1), num(s.p.x2), num(s.p.x3), num(s.nh_norm)]);
    }
    out.table("characteristic_points.csv", &pts)?;

    let vol = volume(&dom);
    let mut geom = Table::new(&csvout::GEOM_HEADER);
    let mut row = |q: &str, v: f64, e: f64| geom.push(vec![q.to_string(), num(v), num(e)]);
    row("volume", vol.value, vol.est_error);
    row("characteristic_points", scan.flagged.len() as f64, 0.0);
    row("min_nh_norm", scan.min_nh, 0.0);
    let mut summary = format!("domain: {}\nvolume: {:.10} +- {:.1e}\n", dom.name(), vol.value, vol.est_error);
    summary += &format!("characteristic points: {} (min |n_h| = {:.3e})\n", scan.flagged.len(), scan.min_nh);

    if !scan.is_clean() {
        let sigma0 = horizontal_perimeter(&quad);
        row("sigma0", sigma0, f64::NAN);
        out.table("geom.csv", &geom)?;
        for s in &scan.flagged {
            summary += &format!("  flagged ({:.6}, {:.6}, {:.6}) |n_h| = {:.3e}\n", s.p.x1, s.p.x2, s.p.x3, s.nh_norm);
        }
        summary += "boundary is characteristic: mean curvature and expansion coefficients are undefined\n";
        print!("{summary}");
        out.text("geom_summary.txt", &summary)?;
        return Err(CliError::Characteristic(format!("{} characteristic points flagged", scan.flagged.len())));
    }

    let pred = predicted_coefficients(&dom, &quad)?;
    let reach = probe_reach(&dom, &quad);
    let k = pred.c1 / pred.sigma0;
    row("sigma0", pred.sigma0, pred.c1_err / k);
    row("total_mean_curvature", pred.total_mean_curvature, 4.0 * pred.c2_err);
    row("reach", reach, 0.0);
    row("c0", pred.c0, pred.c0_err);
    row("c1", pred.c1, pred.c1_err);
    row("c2", pred.c2, pred.c2_err);
    out.table("geom.csv", &geom)?;
    summary += &format!(
        "sigma0: {:.10}\nint H dsigma0: {:.10}\nprobed reach: {:.6}\npredicted Q(t) = {:.8} - {:.8} sqrt(t) + {:.8} t\n",
        pred.sigma0, pred.total_mean_curvature, reach, pred.c0, pred.c1, pred.c2
    );
    print!("{summary}");
    out.text("geom_summary.txt", &summary)
}

fn cmd_heat(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    cfg.check_heat()?;
    let start = Instant::now();
    let mut table = Table::new(&csvout::HEAT_HEADER);
    let run = || -> Result<_, CliError> {
        let (dom, quad) = geometry(cfg)?;
        let layout = shell(cfg, &dom, &quad)?;
        Ok(heat_content(&dom, &layout, &cfg.t_grid, &cfg.sim())?)
    };
    let result = run();
    if let Ok(est) = &result {
        let wall = start.elapsed().as_secs_f64();
        for e in est {
            table.push(csvout::heat_row(e, wall));
            println!("t = {:<8} Q = {:.6} +- {:.2e}", e.t, e.q_hat, e.std_err);
        }
    }
    // header-only file when the estimate failed
    out.table("heat.csv", &table)?;
    result.map(|_| ())
}

fn cmd_fit(cfg: &RunConfig, input: &Path, out: &mut Outputs) -> Result<(), CliError> {
    let points = csvout::read_heat(input)?;
    if points.len() < 4 {
        return Err(CliError::Config(format!("{}: fit needs at least 4 rows, got {}", input.display(), points.len())));
    }
    let fit = fit_expansion(&points)?;
    let (dom, quad) = geometry(cfg)?;
    let pred = predicted_coefficients(&dom, &quad)?;
    let se = fit.std_errs();
    let mut table = Table::new(&csvout::FIT_HEADER);
    let mut alarms = Vec::new();
    for (i, (name, est, p, perr)) in
        [("c0", fit.c0, pred.c0, pred.c0_err), ("c1", fit.c1, pred.c1, pred.c1_err), ("c2", fit.c2, pred.c2, pred.c2_err)].into_iter().enumerate()
    {
        let z = (est - p) / (se[i] * se[i] + perr * perr).sqrt();
        table.push(vec![name.into(), num(est), num(se[i]), num(p), num(z)]);
        println!("{name}: {est:.6} +- {:.2e} (predicted {p:.6}, z = {z:.2})", se[i]);
        if !(z.abs() <= 4.0) {
            alarms.push(format!("{name} z = {z:.2}"));
        }
    }
    out.table("fit.csv", &table)?;
    if alarms.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("fit deviates from prediction: {}", alarms.join(", "))))
    }
}

fn cmd_diag(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let (dom, quad) = geometry(cfg)?;
    let layout = shell(cfg, &dom, &quad)?;
    let mut table = Table::new(&csvout::DIAG_HEADER);
    let mut rows = Vec::new();
    let mut failure = None;
    for &t in &cfg.t_grid {
        match decompose_events(&dom, &layout, t, &cfg.sim(), cfg.delta) {
            Ok(d) => {
                println!(
                    "t = {:<8} I1 = {:.5} I2 = {:.5} I3 = {:.5} res1 = {:.3e} res2 = {:.3e} identity {}",
                    t,
                    d.i1,
                    d.i2,
                    d.i3,
                    d.residual_tau_t,
                    d.residual_t_tau_in,
                    if d.identity_holds() { "ok" } else { "VIOLATED" }
                );
                table.push(csvout::diag_row(&d));
                rows.push(d);
            }
            Err(e) => {
                failure = Some(CliError::from(e));
                break;
            }
        }
    }
    let slope = |f: &dyn Fn(&crate::heatmc::EventDecomposition) -> f64| {
        let (ts, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|d| f(d) > 0.0).map(|d| (d.t, f(d))).unzip();
        if ts.len() >= 2 {
            loglog_slope(&ts, &ys)
        } else {
            (f64::NAN, f64::NAN)
        }
    };
    if failure.is_none() {
        let (r1, r2) = (slope(&|d| d.residual_tau_t), slope(&|d| d.residual_t_tau_in));
        println!("log-log slopes: res_tau_T {:.3} +- {:.3}, res_T_tau {:.3} +- {:.3}", r1.0, r1.1, r2.0, r2.1);
        table.push(csvout::diag_slope_row(r1, r2));
    }
    out.table("diag.csv", &table)?;
    failure.map_or(Ok(()), Err)
}

fn cmd_validate(cfg: &RunConfig, filter: Option<&str>, out: &mut Outputs) -> Result<(), CliError> {
    let results = run_checks(cfg.seed, filter);
    if results.is_empty() {
        return Err(CliError::Config(format!("no check matches filter {:?}", filter.unwrap_or(""))));
    }
    print!("{}", render_table(&results));
    let mut table = Table::new(&["check", "passed", "detail"]);
    for r in &results {
        table.push(vec![r.name.to_string(), r.passed.to_string(), r.detail.clone()]);
    }
    out.table("validate.csv", &table)?;
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{} of {} checks failed: {}", failed.len(), results.len(), failed.join(", "))))
    }
}
