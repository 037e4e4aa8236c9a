//! Experiment harness: JSON configs in, `results.json` and `summary.csv` out.

pub mod config;
pub mod error;
pub mod record;
pub mod run;

pub use config::{Experiment, ExperimentConfig};
pub use error::HarnessError;
pub use record::{emit_report, Report, ResultRecord, Status};
pub use run::run;
