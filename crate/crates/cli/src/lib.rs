//! Scenario runner for the dyadic shell model.
//!
//! A scenario file names a model, its parameters and a list of checks;
//! [`scenario::run_scenario`] integrates it, evaluates the checks and writes
//! CSV tables, JSON reports and SVG plots into the scenario's directory.

pub mod checks;
pub mod compare;
pub mod config;
pub mod plot;
pub mod scenario;

pub use checks::{CheckName, Verdict};
pub use compare::{compare_runs, Divergence, RunTables};
pub use config::ScenarioConfig;
pub use scenario::{run_batch, run_envelope, run_scenario, Outcome, RunSummary};
