//! Experiment harness for the `parsgd` simulator: TOML configs, grid runs,
//! CSV traces, reports, the aggregation benchmark and the oracle suite.

pub mod bench;
pub mod config;
pub mod experiment;
pub mod report;
pub mod trace;
pub mod verify;

pub use config::{AttackConfig, ConfigError, ExperimentConfig, RuleConfig};
pub use experiment::{run_experiment, Cell};
pub use trace::{Trace, TraceHeader, TraceRecord};

/// Overrides the configured output directory of `parsgd run`.
pub const OUTPUT_DIR_ENV: &str = "PARSGD_OUTPUT_DIR";

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ABORTED: i32 = 3;
