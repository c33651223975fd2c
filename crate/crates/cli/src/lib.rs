//! Batch front end: flat experiment configs, CSV output and the acceptance
//! suite.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use run::{run_experiment, RunError, RunOutput};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const EXPERIMENT_FAILURE: u8 = 1;
    pub const CONFIG_ERROR: u8 = 2;
}
