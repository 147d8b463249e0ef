//! Experiment harness behind the `csbm` binary: config files, seeded plans,
//! trial runners and deterministic report rendering.

pub mod config;
pub mod plan;
pub mod report;
pub mod runner;
