//! Named experiments, configuration and artifact output.

pub mod config;
pub mod presets;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind};
pub use presets::{preset, PRESETS};
pub use report::{compare_report, CompareReport};
pub use run::{phase_table, pole_run, run_experiment, trajectory_run};
