//! Sweep driver behind the `qer` binary: grid evaluation, CSV/JSON output and
//! plot scripts.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{CliError, CodeArg, SweepConfig};
pub use sweep::{crossings, run_sweep, SweepRecord};
