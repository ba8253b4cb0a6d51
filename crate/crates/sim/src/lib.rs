//! Configuration-driven TR-EPR simulations on top of `trepr-core`.
//!
//! - [`config`]: the TOML experiment description and its validation.
//! - [`presets`]: ready-made configurations for the population and spectrum
//!   studies.
//! - [`run`]: work splitting, the worker pool and table assembly.
//! - [`output`]: CSV and JSON writers.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{parse_config, ExperimentConfig, Format};
pub use error::{exit, Result, SimError};
pub use output::Table;
pub use presets::{preset, Preset, PRESETS};
pub use run::{run_and_write, run_sweep, RunInfo};
