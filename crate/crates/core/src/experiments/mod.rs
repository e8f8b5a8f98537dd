//! Parameter sweeps over power-law censuses, their CSV/JSON output, and the
//! command-line front end.

pub mod cli;
pub mod config;
pub mod sweep;

pub use config::ExperimentConfig;
pub use sweep::{run_sweep, write_csv, SweepRow, CSV_HEADER};
