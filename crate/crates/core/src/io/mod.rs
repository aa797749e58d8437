//! Scenario files, report and grid output.

pub mod grid_csv;
pub mod json;
pub mod scenario;

pub use grid_csv::{emit_grid_csv, read_grid_column};
pub use json::MatrixJson;
pub use scenario::{
    exit_code_for, load_scenario, run, run_scenario, run_scenario_as, RunOutcome, ScenarioFile,
    Task,
};
