//! Scenario files, named registries and the command runner behind the
//! `degenbeam` binary.

mod config;
mod registry;
mod run;

pub use config::{parse_config, render, CoefficientSpec, Command, ConfigError, GradingSpec, ScenarioConfig};
pub use registry::{initial_field, source_fn, validate_name};
pub use run::{run_scenario, RunReport, STATUS_OK, STATUS_VIOLATION};
