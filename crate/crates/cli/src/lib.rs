//! Harness side of the laboratory: seeded function generators, experiment
//! sweeps over the core operators, and deterministic report emission.
//!
//! Every experiment is a pure function of its [`config::Settings`]; the same
//! seed yields byte-identical reports. Pass flags always correspond to an
//! inequality whose constant is recorded in the report, never to a silent
//! comparison.

pub mod config;
pub mod experiments;
pub mod generators;
pub mod report;
pub mod spike;

pub use config::{OutputFormat, Settings};
pub use report::Report;
