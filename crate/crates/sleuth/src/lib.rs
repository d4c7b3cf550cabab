//! File formats, experiment harness and command-line front end for
//! [`cascade_sleuth_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod manifest;

pub use config::ExperimentConfig;
pub use error::{Result, SleuthError};
pub use experiment::{run_experiment, ExperimentResult};
