//! Config-driven front end: each task reads a TOML file, runs one analysis
//! from `relstab-core` and writes certificates, CSV series and a summary
//! into an output directory.

pub mod config;
pub mod tasks;

pub use config::{load, Loaded, RunConfig, Task};
pub use tasks::{error_exit_code, run, Outcome};
