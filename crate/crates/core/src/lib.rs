//! Sub-Riemannian geometry of the first Heisenberg group and an exit-time Monte
//! Carlo for the short-time heat content of domains in it.

pub mod cli;
pub mod domain;
pub mod driver;
pub mod error;
pub mod heatmc;
pub mod hgroup;
pub mod rng;
pub mod stats;
pub mod surfgeom;
pub mod tubechart;
