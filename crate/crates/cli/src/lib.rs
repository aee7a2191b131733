//! Experiment presets, sweep execution, table output and the validation
//! battery behind the `probesched` binary.

pub mod error;
pub mod experiment;
pub mod output;
pub mod settings;
pub mod validate;

pub use error::CliError;
pub use experiment::{run_experiment, ExperimentConfig, Record, Table};
pub use settings::{Preset, Settings};
