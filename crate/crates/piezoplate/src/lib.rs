//! Configuration, pipeline, verification and serialization around
//! `piezoplate-core`.

pub mod config;
pub mod convergence;
pub mod io;
pub mod pipeline;
pub mod verify;

pub use config::{parse_config, parse_config_str, Regime, RunConfig};
pub use pipeline::{run_pipeline, RunReport, Stage, StageError};
