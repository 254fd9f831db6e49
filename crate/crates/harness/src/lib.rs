//! Experiment driver for `mgrit-modes`: TOML configs, engine dispatch and
//! deterministic CSV output.

pub mod average;
pub mod cli;
pub mod config;
pub mod csv;
pub mod run;

pub use average::{average_reduction, Average, AverageError};
pub use config::{ConfigError, ConfigFile, Experiment};
pub use csv::ResultRow;
