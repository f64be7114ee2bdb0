//! Likelihood-ratio e-values certified on either side of a test.
//!
//! The same Bayes factor is an e-value for Type I control under the null
//! (`E_{H0}[B10] = 1`) and, inverted, for Type II control under the
//! alternative (`E_{H1}[B01] = 1`). This crate builds the models, evidence
//! types, Bayes-risk thresholds, composite mixtures, redundancy asymptotics
//! and sequential e-processes around that identity, and checks each claim
//! against exact enumeration or seeded Monte Carlo.

pub mod asymptotics;
pub mod composite;
pub mod decision;
pub mod enumerate;
pub mod error;
pub mod evidence;
pub mod models;
pub mod montecarlo;
pub mod numeric;
pub mod sequential;

pub use error::{Error, Result};
pub use evidence::{Alternative, Direction, EvidenceSpec, Method};
pub use models::{Dataset, Family, Model};

/// Version of this library, stamped into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
