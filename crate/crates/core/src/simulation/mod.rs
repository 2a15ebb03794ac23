//! Monte Carlo harness for the simulation designs.

pub mod design;
pub mod study;
pub mod tables;

pub use design::{
    ar1_design, coefficients_for, example1_scenario, example2_scenario, gen_ar1_row, replicate, sis_scenario,
    sis_signal_floor, Replicate,
};
pub use study::{
    aggregate, mean_and_se, metrics, population_quadratic_form, run_outcomes, run_replication, run_study, Metrics,
    MetricsRow, MetricsTable, MethodOutcome, ReplicationOutcome, StudyConfig, StudyMethod,
};
pub use tables::{reproduce, to_csv, StudyTable, Scale};
