//! Runnable verification suite: JSON experiment configs in, pass/fail
//! reports out.

pub mod checks;
pub mod config;
pub mod emit;
pub mod error;
pub mod report;

pub use checks::run;
pub use config::{Check, ExperimentConfig, Group, MethodConfig};
pub use emit::{emit, Format};
pub use error::HarnessError;
pub use report::{CheckReport, Section, Status};
