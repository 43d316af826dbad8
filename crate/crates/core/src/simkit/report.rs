//! CSV tables for experiment results.
//!
//! Every table starts with a `#schema=<name>/<version>` line followed by a
//! header row. Reals are written as `{:.6e}`; missing values are empty.
//!
//! | schema               | one row per                   |
//! |----------------------|-------------------------------|
//! | `secmimo.curve/1`    | experiment, policy, SNR point |
//! | `secmimo.gap/1`      | experiment, policy            |
//! | `secmimo.threshold/1`| experiment, policy, Gamma     |
//! | `secmimo.group/1`    | experiment, policy, group     |

use super::gap::SecurityGapResult;
use super::sweep::PointResult;
use super::system::GroupOutcome;
use crate::error::{Error, Result};

pub const CURVE_SCHEMA: &str = "secmimo.curve/1";
pub const GAP_SCHEMA: &str = "secmimo.gap/1";
pub const THRESHOLD_SCHEMA: &str = "secmimo.threshold/1";
pub const GROUP_SCHEMA: &str = "secmimo.group/1";

const CURVE_HEADER: [&str; 14] = [
    "experiment",
    "policy",
    "snr_db",
    "ber_legit",
    "ber_legit_hw",
    "ber_eve",
    "ber_eve_hw",
    "mse_legit",
    "mse_legit_hw",
    "mse_eve",
    "mse_eve_hw",
    "trials",
    "nonconverged",
    "failed",
];
const GAP_HEADER: [&str; 7] =
    ["experiment", "policy", "snr_min_legit_db", "snr_max_eve_db", "gap_db", "target_ber_legit", "target_ber_eve"];
const THRESHOLD_HEADER: [&str; 9] =
    ["experiment", "policy", "gamma", "snr_db", "mse_eve", "mse_eve_hw", "trials", "nonconverged", "failed"];
const GROUP_HEADER: [&str; 8] =
    ["experiment", "policy", "group_id", "cluster_size", "ber_legit", "ber_eve", "converged", "failed"];

pub fn real(x: f64) -> String {
    format!("{x:.6e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// A table of one schema, built row by row.
pub struct CsvTable {
    schema: &'static str,
    writer: csv::Writer<Vec<u8>>,
}

impl CsvTable {
    fn new(schema: &'static str, header: &[&str]) -> Result<Self> {
        let mut t = Self { schema, writer: csv::Writer::from_writer(Vec::new()) };
        t.row(header.iter().map(|s| s.to_string()))?;
        Ok(t)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<()> {
        self.writer
            .write_record(fields.into_iter().collect::<Vec<_>>())
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))
    }

    pub fn curves() -> Result<Self> {
        Self::new(CURVE_SCHEMA, &CURVE_HEADER)
    }

    pub fn gaps() -> Result<Self> {
        Self::new(GAP_SCHEMA, &GAP_HEADER)
    }

    pub fn thresholds() -> Result<Self> {
        Self::new(THRESHOLD_SCHEMA, &THRESHOLD_HEADER)
    }

    pub fn groups() -> Result<Self> {
        Self::new(GROUP_SCHEMA, &GROUP_HEADER)
    }

    pub fn curve_row(&mut self, experiment: &str, policy: &str, p: &PointResult) -> Result<()> {
        self.row([
            experiment.to_string(),
            policy.to_string(),
            real(p.snr_db),
            opt(p.ber_legit),
            opt(p.ber_legit_hw),
            opt(p.ber_eve),
            opt(p.ber_eve_hw),
            real(p.mse_legit),
            real(p.mse_legit_hw),
            real(p.mse_eve),
            real(p.mse_eve_hw),
            p.trials.to_string(),
            p.nonconverged.to_string(),
            p.failed.to_string(),
        ])
    }

    /// Gap row; the SNR columns are empty when a curve never crossed its
    /// target.
    pub fn gap_row(
        &mut self,
        experiment: &str,
        policy: &str,
        target_legit: f64,
        target_eve: f64,
        g: Option<&SecurityGapResult>,
    ) -> Result<()> {
        self.row([
            experiment.to_string(),
            policy.to_string(),
            opt(g.map(|g| g.snr_min_legit_db)),
            opt(g.map(|g| g.snr_max_eve_db)),
            opt(g.map(|g| g.gap_db)),
            real(target_legit),
            real(target_eve),
        ])
    }

    pub fn threshold_row(&mut self, experiment: &str, policy: &str, gamma: f64, p: &PointResult) -> Result<()> {
        self.row([
            experiment.to_string(),
            policy.to_string(),
            real(gamma),
            real(p.snr_db),
            real(p.mse_eve),
            real(p.mse_eve_hw),
            p.trials.to_string(),
            p.nonconverged.to_string(),
            p.failed.to_string(),
        ])
    }

    pub fn group_row(&mut self, experiment: &str, policy: &str, g: &GroupOutcome) -> Result<()> {
        self.row([
            experiment.to_string(),
            policy.to_string(),
            g.group.to_string(),
            g.cluster.len().to_string(),
            real(g.ber_legit),
            real(g.ber_eve),
            u8::from(g.converged).to_string(),
            u8::from(g.failed).to_string(),
        ])
    }

    /// The finished table, schema line first.
    pub fn finish(self) -> Result<String> {
        let body = self.writer.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        let body = String::from_utf8(body).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(format!("#schema={}\n{body}", self.schema))
    }
}
