//! Std-side tooling around `prqs-core`: a deterministic parallel Monte Carlo
//! runner, parameter sweeps, CSV/JSON file formats and the `prqs` CLI.

pub mod config;
pub mod data;
pub mod error;
pub mod format;
pub mod runner;
pub mod sweep;

pub use error::LabError;

/// Version string written into every JSON report and CSV header.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
