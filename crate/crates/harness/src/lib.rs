//! Experiment harness for the torusflow solvers: run configuration, scenario
//! presets, single runs and viscosity sweeps, inequality checks, and the
//! persistence of diagnostic series, manifests and checkpoints.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod check;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod presets;
pub mod run;
pub mod sweep;

pub use config::{ParamsConfig, RunConfig, System};
pub use error::{HarnessError, Result};
pub use run::{run_scenario, RunManifest, RunOutput};
