//! Scenario generation, experiment execution and reporting.

mod config;
mod experiment;
mod output;
mod scenario;
mod suites;

pub use config::{ComparatorModel, LossModel, PreconditionerKind, ScenarioConfig};
pub use experiment::{
    bound_form, log_plus, loglog_slope, run_experiment, run_trial, Check, ComparatorDiagnostics, ExperimentOutput,
    ExperimentReport, RungReport, TrialRecords, TrialReport,
};
pub use output::{
    emit_csv, parse_records_csv, read_records_csv, write_json, write_records_csv, write_summary_csv, RecordRow,
    RECORD_HEADER,
};
pub use scenario::{generate_scenario, read_rows, scenario_rng, tracking_loss, LossSource, Scenario};
pub use suites::{lowerbound_suite, matrices_suite, random_sequence, random_symmetric, verify_suite, SuiteReport};
