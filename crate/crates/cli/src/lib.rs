//! Experiment runner for `abba-core`.
//!
//! A TOML config names one problem and any number of solvers. Each solver
//! produces `<name>.csv` (one row per iteration), `<name>.json` (run manifest)
//! and, for image problems, 16-bit PGM reconstructions.

pub mod compare;
pub mod config;
pub mod experiment;
pub mod output;
pub mod problem;

pub use config::{ConfigError, ExperimentConfig};
pub use experiment::{run_experiment, solve, ExperimentError, RunOutput};
pub use problem::Problem;
