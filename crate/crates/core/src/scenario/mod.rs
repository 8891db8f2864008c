//! Scenario files, the scenario runner and the identity check suite.

pub mod checks;
pub mod run;
pub mod schema;

pub use checks::{identity_suite, Bound, CheckItem, SuiteOptions};
pub use run::{default_stage, run_scenario, RunReport, Stage};
pub use schema::{parse_scenario, parse_scenario_str, Scenario};
