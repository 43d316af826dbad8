//! Monte-Carlo link simulation: QPSK through designed transceivers, BER/MSE
//! curves over SNR, security gaps, and the system-level driver.

mod gap;
mod link;
mod report;
mod sweep;
mod system;

pub use gap::{security_gap, snr_max_above, snr_min_reaching, SecurityGapResult};
pub use link::{qpsk_demodulate, qpsk_modulate, run_link_trial, LinkTrialOutcome};
pub use report::{real, CsvTable, CURVE_SCHEMA, GAP_SCHEMA, GROUP_SCHEMA, THRESHOLD_SCHEMA};
pub use sweep::{
    design_for, sweep, DesignKind, ErrorKind, ErrorPolicy, ExperimentResult, PointResult, SnrSweep, SweepTemplate,
};
pub use system::{system_level_run, GroupOutcome, SystemLevelParams};
