//! CSV emission with fixed headers and locale-free 17-significant-digit floats,
//! and the heat CSV reader used by `fit`.

use std::path::Path;

use super::CliError;
use crate::heatmc::{EventDecomposition, HeatContentEstimate};

pub const HEAT_HEADER: [&str; 7] = ["t", "q_hat", "std_err", "shell_eps", "n_paths", "censored_fraction", "wall_time_s"];
pub const GEOM_HEADER: [&str; 3] = ["quantity", "value", "est_error"];
pub const FIT_HEADER: [&str; 5] = ["coef", "estimate", "std_err", "predicted", "z"];
pub const DIAG_HEADER: [&str; 11] = ["t", "i1", "i2", "i3", "res_tau_T", "res_T_tau", "se_i1", "se_i2", "se_i3", "se_r1", "se_r2"];

/// `d.ddddddddddddddddde±x`: 17 significant digits, independent of locale.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Rows of stringified cells under a header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        // Writing into a Vec cannot fail.
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

pub fn heat_row(e: &HeatContentEstimate, wall_time_s: f64) -> Vec<String> {
    vec![
        num(e.t),
        num(e.q_hat),
        num(e.std_err),
        num(e.shell_eps),
        e.n_paths_per_node.to_string(),
        num(e.censored_fraction),
        format!("{wall_time_s:.3}"),
    ]
}

pub fn diag_row(d: &EventDecomposition) -> Vec<String> {
    [d.t, d.i1, d.i2, d.i3, d.residual_tau_t, d.residual_t_tau_in, d.se_i1, d.se_i2, d.se_i3, d.se_r1, d.se_r2].iter().map(|v| num(*v)).collect()
}

/// Slope row: `t = "slope"`, the two residual columns hold log-log slopes and
/// `se_r1`, `se_r2` their standard errors; other cells are empty.
pub fn diag_slope_row(r1: (f64, f64), r2: (f64, f64)) -> Vec<String> {
    let e = String::new;
    vec!["slope".into(), e(), e(), e(), num(r1.0), num(r2.0), e(), e(), e(), num(r1.1), num(r2.1)]
}

/// Reads `t, q_hat, std_err` (and `n_paths`, `shell_eps` when present) from a heat CSV.
pub fn read_heat(path: &Path) -> Result<Vec<HeatContentEstimate>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let need = |name: &str| col(name).ok_or_else(|| CliError::Schema(format!("{}: missing column {name:?}", path.display())));
    let (it, iq, is) = (need("t")?, need("q_hat")?, need("std_err")?);
    let (ie, ip) = (col("shell_eps"), col("n_paths"));
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        let field = |i: usize, name: &str| -> Result<f64, CliError> {
            rec.get(i)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Schema(format!("{}: row {}: column {name:?} is not a number", path.display(), line + 1)))
        };
        out.push(HeatContentEstimate {
            t: field(it, "t")?,
            q_hat: field(iq, "q_hat")?,
            std_err: field(is, "std_err")?,
            shell_eps: ie.map(|i| field(i, "shell_eps")).transpose()?.unwrap_or(f64::NAN),
            interior_volume: f64::NAN,
            n_shell_nodes: 0,
            n_paths_per_node: ip.map(|i| field(i, "n_paths")).transpose()?.unwrap_or(0.0) as usize,
            censored_fraction: 0.0,
            interior_bound: 0.0,
        });
    }
    Ok(out)
}
