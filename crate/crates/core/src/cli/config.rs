//! Run configuration: a TOML file with `[domain]`, `[geometry]` and
//! `[simulation]` tables, overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::catalog::DomainSpec;
use super::CliError;
use crate::heatmc::{ShellEps, SimConfig};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub quadrature_level: Option<u32>,
    pub surface_nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub t_grid: Option<Vec<f64>>,
    pub n_paths: Option<usize>,
    pub n_steps: Option<usize>,
    pub n_substeps: Option<usize>,
    pub shell_eps: Option<EpsSetting>,
    pub bridge: Option<bool>,
    pub delta: Option<f64>,
}

/// `"auto"` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSetting {
    Fixed(f64),
    Named(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

impl EpsSetting {
    pub fn to_shell_eps(self) -> ShellEps {
        match self {
            EpsSetting::Fixed(e) => ShellEps::Fixed(e),
            EpsSetting::Named(AutoTag::Auto) => ShellEps::Auto,
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub n_paths: Option<usize>,
    pub n_steps: Option<usize>,
    pub t_grid: Option<Vec<f64>>,
}

/// Fully resolved settings, echoed into every manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub t_grid: Vec<f64>,
    pub n_paths: usize,
    pub n_steps: usize,
    pub n_substeps: usize,
    pub shell_eps: EpsSetting,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub quadrature_level: u32,
    pub surface_nodes: usize,
    pub bridge: bool,
    pub delta: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: DomainSpec::default(),
            t_grid: vec![0.0025, 0.005, 0.01, 0.02, 0.04],
            n_paths: 1000,
            n_steps: 256,
            n_substeps: 8,
            shell_eps: EpsSetting::Named(AutoTag::Auto),
            seed: 0,
            output_dir: PathBuf::from("out"),
            quadrature_level: 3,
            surface_nodes: 11,
            bridge: true,
            delta: None,
        }
    }
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: &Overrides) -> Result<Self, CliError> {
        let d = RunConfig::default();
        let sim = file.simulation;
        let geo = file.geometry;
        let cfg = RunConfig {
            domain: file.domain.unwrap_or(d.domain),
            t_grid: flags.t_grid.clone().or(sim.t_grid).unwrap_or(d.t_grid),
            n_paths: flags.n_paths.or(sim.n_paths).unwrap_or(d.n_paths),
            n_steps: flags.n_steps.or(sim.n_steps).unwrap_or(d.n_steps),
            n_substeps: sim.n_substeps.unwrap_or(d.n_substeps),
            shell_eps: sim.shell_eps.unwrap_or(d.shell_eps),
            seed: flags.seed.or(file.seed).unwrap_or(d.seed),
            output_dir: flags.output_dir.clone().or(file.output_dir).unwrap_or(d.output_dir),
            quadrature_level: geo.quadrature_level.unwrap_or(d.quadrature_level),
            surface_nodes: geo.surface_nodes.unwrap_or(d.surface_nodes),
            bridge: sim.bridge.unwrap_or(d.bridge),
            delta: sim.delta,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };
        Self::resolve(file, flags)
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad(format!("t_grid must be nonempty and strictly positive, got {:?}", self.t_grid));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("t_grid must be strictly ascending, got {:?}", self.t_grid));
        }
        if self.n_paths == 0 || self.n_steps == 0 || self.n_substeps == 0 {
            return bad("n_paths, n_steps and n_substeps must be positive".into());
        }
        if self.surface_nodes == 0 || self.quadrature_level == 0 {
            return bad("surface_nodes and quadrature_level must be positive".into());
        }
        if let EpsSetting::Fixed(e) = self.shell_eps {
            if !(e > 0.0 && e.is_finite()) {
                return bad(format!("shell_eps must be positive or \"auto\", got {e}"));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("delta must be positive, got {d}"));
            }
        }
        Ok(())
    }

    /// Heat runs need at least a thousand paths per node.
    pub fn check_heat(&self) -> Result<(), CliError> {
        if self.n_paths < 1000 {
            return Err(CliError::Config(format!("heat runs need n_paths >= 1000, got {}", self.n_paths)));
        }
        Ok(())
    }

    pub fn sim(&self) -> SimConfig {
        SimConfig { n_paths: self.n_paths, n_steps: self.n_steps, n_substeps: self.n_substeps, seed: self.seed, bridge: self.bridge }
    }

    pub fn t_max(&self) -> f64 {
        self.t_grid.last().copied().unwrap_or(0.0)
    }
}

pub fn parse_tgrid(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad t value {x:?}: {e}"))).collect()
}
