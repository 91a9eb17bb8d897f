//! Declarative experiment runner for block Toeplitz spectral studies.
//!
//! A TOML config names the ν×ν symbol grid, the size laws `n_j(η)`, an η
//! sweep and a list of analyses. [`run_experiment`] writes CSV/JSON value
//! files and a [`RunManifest`]; [`emit_plotdata`] turns those into
//! gnuplot-ready panels. The functions in [`tasks`] return the same
//! numbers in memory.

pub mod builtin;
pub mod config;
pub mod plot;
pub mod runner;
pub mod tasks;

pub use builtin::{builtin, builtin_source, BUILTIN};
pub use config::{load_config, parse_config, ConfigError, ExperimentConfig, Task};
pub use plot::{emit_plotdata, PlotError};
pub use runner::{run_experiment, RunError, RunManifest};
