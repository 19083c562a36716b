//! Experiment runner for lplab: configurations, test families, scenario
//! runners and report emission.

pub mod config;
pub mod family;
pub mod report;
pub mod scenarios;

pub use config::{ExperimentConfig, FamilySpec, KernelRef, Scenario, ScaleSpec, Shape, ThetaSpec};
pub use report::{emit_report, read_report, Diagnostic, PlotTable, Report, Row};
pub use scenarios::run_experiment;
