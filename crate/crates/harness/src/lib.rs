//! Experiment runner for the wickgp toolkit: configuration, Monte Carlo
//! rate studies, audits and their CSV/JSON outputs.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod rate;
pub mod registry;
pub mod studies;

pub use config::{ExperimentConfig, NoiseKind, StudyKind};
pub use error::HarnessError;
pub use output::{Check, FitEntry, StudyOutput, Summary, Table};
pub use rate::{fit_rate, RateFit};
pub use registry::{Registry, RunContext, Study};
