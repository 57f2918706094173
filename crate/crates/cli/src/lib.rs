//! Config-driven experiment runner around the `semel` workbench: builds
//! domains, measures, and nonlinearities from TOML configs and executes
//! solve/verify/fk/sweep/decompose/tvnorm pipelines with machine-readable
//! outputs.

pub mod config;
pub mod expr;
pub mod report;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, Task};
pub use run::{run, RunError, RunOutput};
