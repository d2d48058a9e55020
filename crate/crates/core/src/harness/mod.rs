//! Run configuration, parameter sweeps and serialized outputs.

pub mod commands;
pub mod config;
pub mod sweep;

pub use commands::{run, run_and_write};
pub use config::{RunConfig, Task};
pub use sweep::{spearman, uv_sweep, SweepCell, SweepResult};
