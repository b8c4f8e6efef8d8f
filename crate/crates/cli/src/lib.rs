//! Scenario-driven command-line front end for the dobrushin library:
//! parse a JSON description of a space, semigroup, and projection, run one
//! of nine registered analyses, and emit deterministic machine-readable
//! reports (report.json, curve.csv).

pub mod analyses;
pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod schema;

pub use error::CliError;
