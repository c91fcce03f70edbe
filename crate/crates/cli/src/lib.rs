//! Experiment runner: configuration, sweeps, validation and single-point analysis.

pub mod analyze;
pub mod config;
pub mod sweep;
pub mod validate;
