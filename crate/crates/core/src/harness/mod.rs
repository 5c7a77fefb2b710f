//! Experiment runner: configuration, spectrum runs, sweeps and reports.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, ExperimentConfig};
pub use run::{compare, run_oracle, run_spectrum, run_sweep, CompareReport, OracleRow, Rate, Row, RunOutput, SweepReport};
