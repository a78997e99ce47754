//! Experiment harness for wideband BD-RIS design: configuration, seeded Monte
//! Carlo sweeps, and CSV output. The numerics live in `bdris-core`.

pub mod config;
pub mod harness;
pub mod io;

pub use config::ExperimentConfig;
pub use harness::{Experiment, Scheme, SweepAxis, SweepOutput, SweepRecord};
