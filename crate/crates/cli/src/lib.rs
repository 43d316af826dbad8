//! Config loading and experiment execution behind the `secmimo` binary.

pub mod config;
pub mod run;

pub use config::{load, load_str, Config, ConfigError, Issue};
pub use run::{execute, Artifacts};
