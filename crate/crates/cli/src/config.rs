//! Experiment configuration files.
//!
//! Configs are TOML: top-level scalars, `[section]` tables with
//! `key = scalar` or `key = [list]` entries, and `[[curve]]` array entries.
//! Unknown keys are rejected. Every section except `experiment` has
//! defaults matching the physical-layer parameter set.

use std::fmt;

use serde::{Deserialize, Serialize};

use secmimo::channel::{LayoutParams, SystemDims};
use secmimo::clustering::ClusteringPolicy;
use secmimo::simkit::{DesignKind, ErrorKind, ErrorPolicy, SnrSweep, SystemLevelParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig3Ber,
    Fig4Mse,
    Fig5Gap,
    Fig6An,
    Fig7Threshold,
    Fig8System,
    Custom,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig3Ber => "fig3_ber",
            ExperimentKind::Fig4Mse => "fig4_mse",
            ExperimentKind::Fig5Gap => "fig5_gap",
            ExperimentKind::Fig6An => "fig6_an",
            ExperimentKind::Fig7Threshold => "fig7_threshold",
            ExperimentKind::Fig8System => "fig8_system",
            ExperimentKind::Custom => "custom",
        }
    }

    fn uses_sweep(self) -> bool {
        !matches!(self, ExperimentKind::Fig7Threshold | ExperimentKind::Fig8System)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub errors: ErrorsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, rename = "curve", skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_level: Option<SystemLevelSection>,
}

fn default_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub n_bs: usize,
    pub n_users: usize,
    pub n_eves: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub eve_antennas: usize,
    pub streams: usize,
    pub an_var: f64,
    pub eve_mse_floor: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            n_bs: 4,
            n_users: 8,
            n_eves: 2,
            tx_antennas: 16,
            rx_antennas: 8,
            eve_antennas: 4,
            streams: 2,
            an_var: 0.09,
            eve_mse_floor: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErrorsSection {
    /// Per-entry error variances (stochastic model).
    pub sigma_leg: f64,
    pub sigma_eve: f64,
    /// Squared Frobenius radii (norm-bounded model).
    pub tau_leg: f64,
    pub tau_eve: f64,
}

impl Default for ErrorsSection {
    fn default() -> Self {
        Self { sigma_leg: 0.04, sigma_eve: 0.09, tau_leg: 0.04, tau_eve: 0.09 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub beta: f64,
    pub max_outer_iters: usize,
    pub max_nbe_iters: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { beta: 1e-4, max_outer_iters: 50, max_nbe_iters: 30 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub snr_db: Vec<f64>,
    pub trials_per_point: usize,
    pub symbols_per_trial: usize,
    #[serde(default = "one")]
    pub error_draws: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignLabel {
    Perfect,
    #[serde(rename = "NR")]
    NonRobust,
    #[serde(rename = "R-SE")]
    RobustStochastic,
    #[serde(rename = "R-NBE")]
    RobustNormBounded,
}

impl DesignLabel {
    pub fn kind(self) -> DesignKind {
        match self {
            DesignLabel::Perfect => DesignKind::Perfect,
            DesignLabel::NonRobust => DesignKind::NonRobust,
            DesignLabel::RobustStochastic => DesignKind::RobustStochastic,
            DesignLabel::RobustNormBounded => DesignKind::RobustNormBounded,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalLabel {
    Perfect,
    Stochastic,
    NormBounded,
}

/// One curve: a design evaluated under one error model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub design: DesignLabel,
    pub eval: EvalLabel,
    /// Overrides `system.an_var` for this curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub an_var: Option<f64>,
    /// Policy column in the CSV; defaults to the design label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl CurveSection {
    pub fn policy(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.design.kind().label().to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapSection {
    pub target_legit: f64,
    pub target_eve: f64,
}

impl Default for GapSection {
    fn default() -> Self {
        Self { target_legit: 1e-4, target_eve: 0.3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub snr_db: f64,
    pub gamma: Vec<f64>,
    pub trials: usize,
    #[serde(default = "one")]
    pub error_draws: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemLevelSection {
    pub n_groups: usize,
    /// Any of `mbsfn`, `greedy`, `sc_ptm`.
    pub policies: Vec<String>,
    pub greedy_min_size: usize,
    pub n_bs: usize,
    pub area_km2: f64,
    pub sync_size: usize,
    pub n_members: usize,
    pub n_eves: usize,
    pub group_radius_m: f64,
    pub carrier_mhz: f64,
    pub h_bs_m: f64,
    pub h_ue_m: f64,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub eve_antennas: usize,
    pub streams: usize,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub an_var: f64,
    pub tau_leg: f64,
    pub tau_eve: f64,
    pub eve_mse_floor: f64,
    pub symbols: usize,
    pub error_draws: usize,
    pub max_outer_iters: usize,
    pub max_nbe_iters: usize,
}

impl Default for SystemLevelSection {
    fn default() -> Self {
        let p = SystemLevelParams::default();
        Self {
            n_groups: p.n_groups,
            policies: vec!["mbsfn".into(), "greedy".into(), "sc_ptm".into()],
            greedy_min_size: 10,
            n_bs: p.layout.n_bs,
            area_km2: p.layout.area_km2,
            sync_size: p.layout.sync_size,
            n_members: p.layout.n_members,
            n_eves: p.layout.n_eves,
            group_radius_m: p.layout.group_radius_m,
            carrier_mhz: p.layout.carrier_freq_hz / 1e6,
            h_bs_m: p.layout.h_bs_m,
            h_ue_m: p.layout.h_ue_m,
            tx_antennas: p.tx_antennas,
            rx_antennas: p.rx_antennas,
            eve_antennas: p.eve_antennas,
            streams: p.streams,
            tx_power_dbm: p.tx_power_dbm,
            noise_dbm: p.noise_dbm,
            an_var: p.an_var,
            tau_leg: p.tau_leg,
            tau_eve: p.tau_eve,
            eve_mse_floor: p.eve_mse_floor,
            symbols: p.symbols,
            error_draws: p.error_draws,
            max_outer_iters: p.max_outer_iters,
            max_nbe_iters: p.max_nbe_iters,
        }
    }
}

impl SystemLevelSection {
    pub fn params(&self, beta: f64) -> SystemLevelParams {
        SystemLevelParams {
            layout: LayoutParams {
                n_bs: self.n_bs,
                area_km2: self.area_km2,
                sync_size: self.sync_size,
                n_members: self.n_members,
                n_eves: self.n_eves,
                group_radius_m: self.group_radius_m,
                carrier_freq_hz: self.carrier_mhz * 1e6,
                h_bs_m: self.h_bs_m,
                h_ue_m: self.h_ue_m,
            },
            n_groups: self.n_groups,
            tx_antennas: self.tx_antennas,
            rx_antennas: self.rx_antennas,
            eve_antennas: self.eve_antennas,
            streams: self.streams,
            tx_power_dbm: self.tx_power_dbm,
            noise_dbm: self.noise_dbm,
            an_var: self.an_var,
            tau_leg: self.tau_leg,
            tau_eve: self.tau_eve,
            eve_mse_floor: self.eve_mse_floor,
            symbols: self.symbols,
            error_draws: self.error_draws,
            beta,
            max_outer_iters: self.max_outer_iters,
            max_nbe_iters: self.max_nbe_iters,
        }
    }

    /// Policies in config order with their CSV labels.
    pub fn parsed_policies(&self) -> Result<Vec<(ClusteringPolicy, String)>, String> {
        self.policies
            .iter()
            .map(|p| match p.as_str() {
                "mbsfn" => Ok((ClusteringPolicy::Mbsfn, "MBSFN".to_string())),
                "sc_ptm" => Ok((ClusteringPolicy::ScPtm, "SC-PTM".to_string())),
                "greedy" => Ok((
                    ClusteringPolicy::Greedy(self.greedy_min_size),
                    format!("Greedy({})", self.greedy_min_size),
                )),
                other => Err(format!("unknown policy \"{other}\" (expected mbsfn, greedy or sc_ptm)")),
            })
            .collect()
    }
}

impl Config {
    /// Physical-layer dimensions; noise variances are set per SNR point by
    /// the sweep.
    pub fn dims(&self, an_var: Option<f64>) -> SystemDims {
        let s = &self.system;
        SystemDims::uniform(
            s.n_bs,
            s.n_users,
            s.n_eves,
            s.tx_antennas,
            s.rx_antennas,
            s.eve_antennas,
            s.streams,
            1.0,
            1.0,
            an_var.unwrap_or(s.an_var),
            s.eve_mse_floor,
        )
    }

    pub fn eval_policy(&self, eval: EvalLabel) -> ErrorPolicy {
        let e = &self.errors;
        match eval {
            EvalLabel::Perfect => ErrorPolicy::PERFECT,
            EvalLabel::Stochastic => ErrorPolicy::stochastic(e.sigma_leg, e.sigma_eve),
            EvalLabel::NormBounded => ErrorPolicy { kind: ErrorKind::NormBounded, leg: e.tau_leg, eve: e.tau_eve },
        }
    }

    /// Uncertainty the design of `curve` assumes.
    pub fn assumed(&self, design: DesignLabel) -> (f64, f64) {
        let e = &self.errors;
        match design {
            DesignLabel::RobustNormBounded => (e.tau_leg, e.tau_eve),
            _ => (e.sigma_leg, e.sigma_eve),
        }
    }

    pub fn snr_sweep(&self) -> Option<SnrSweep> {
        self.sweep.as_ref().map(|s| SnrSweep {
            points: s.snr_db.clone(),
            trials_per_point: s.trials_per_point,
            symbols_per_trial: s.symbols_per_trial,
        })
    }

    /// Every invariant violation; empty when the config can run.
    pub fn issues(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        let mut push = |key: &str, msg: String| out.push(Issue { key: key.to_string(), line: None, message: msg });
        let kind = self.experiment;

        if kind != ExperimentKind::Fig8System {
            for msg in self.dims(None).issues() {
                let key = msg.split([' ', '=']).next().unwrap_or("system");
                push(&format!("system.{key}"), msg);
            }
            for c in &self.curves {
                if let Some(z) = c.an_var {
                    if !(0.0..1.0).contains(&z) {
                        push("curve.an_var", format!("an_var = {z} must lie in [0, max_power = 1)"));
                    }
                }
            }
        }
        let e = &self.errors;
        for (k, v) in [
            ("errors.sigma_leg", e.sigma_leg),
            ("errors.sigma_eve", e.sigma_eve),
            ("errors.tau_leg", e.tau_leg),
            ("errors.tau_eve", e.tau_eve),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                push(k, format!("{v} must be finite and nonnegative"));
            }
        }
        if !(self.solver.beta > 0.0) {
            push("solver.beta", format!("beta = {} must be positive", self.solver.beta));
        }
        if self.solver.max_outer_iters == 0 {
            push("solver.max_outer_iters", "must be at least 1".into());
        }
        if self.solver.max_nbe_iters == 0 {
            push("solver.max_nbe_iters", "must be at least 1".into());
        }

        match (kind.uses_sweep(), &self.sweep) {
            (true, None) => push("sweep", format!("{} needs a [sweep] section", kind.name())),
            (false, Some(_)) => push("sweep", format!("[sweep] is not used by {}", kind.name())),
            (true, Some(s)) => {
                if s.snr_db.is_empty() || s.snr_db.windows(2).any(|w| !(w[0] < w[1])) {
                    push("sweep.snr_db", "SNR points must be nonempty and strictly ascending".into());
                }
                if s.trials_per_point == 0 {
                    push("sweep.trials_per_point", "must be at least 1".into());
                }
                if s.error_draws == 0 {
                    push("sweep.error_draws", "must be at least 1".into());
                }
            }
            (false, None) => {}
        }
        let wants_curves = kind != ExperimentKind::Fig8System;
        if wants_curves && self.curves.is_empty() {
            push("curve", format!("{} needs at least one [[curve]]", kind.name()));
        }
        if !wants_curves && !self.curves.is_empty() {
            push("curve", format!("[[curve]] is not used by {}", kind.name()));
        }
        let mut labels: Vec<String> = self.curves.iter().map(|c| c.policy()).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            push("curve.label", "curve labels must be distinct".into());
        }
        for c in &self.curves {
            if c.design == DesignLabel::Perfect && c.eval != EvalLabel::Perfect {
                push("curve.eval", format!("curve {} uses the Perfect design, which is evaluated without errors", c.policy()));
            }
        }

        if kind == ExperimentKind::Fig5Gap {
            let g = self.gap.clone().unwrap_or_default();
            if !(g.target_legit > 0.0 && g.target_legit < 0.5) {
                push("gap.target_legit", format!("{} outside (0, 0.5)", g.target_legit));
            }
            if !(g.target_eve > 0.0 && g.target_eve < 0.5) {
                push("gap.target_eve", format!("{} outside (0, 0.5)", g.target_eve));
            }
        } else if self.gap.is_some() {
            push("gap", format!("[gap] is not used by {}", kind.name()));
        }

        match (kind == ExperimentKind::Fig7Threshold, &self.threshold) {
            (true, None) => push("threshold", "fig7_threshold needs a [threshold] section".into()),
            (false, Some(_)) => push("threshold", format!("[threshold] is not used by {}", kind.name())),
            (true, Some(t)) => {
                if t.gamma.is_empty() {
                    push("threshold.gamma", "needs at least one value".into());
                }
                for g in &t.gamma {
                    if !(*g >= 0.0 && *g <= self.system.streams as f64) {
                        push(
                            "threshold.gamma",
                            format!("{g} outside [0, streams = {}]; an MSE never exceeds tr(I) = streams", self.system.streams),
                        );
                    }
                }
                if t.trials == 0 {
                    push("threshold.trials", "must be at least 1".into());
                }
                if t.error_draws == 0 {
                    push("threshold.error_draws", "must be at least 1".into());
                }
            }
            (false, None) => {}
        }

        match (kind == ExperimentKind::Fig8System, &self.system_level) {
            (true, None) => push("system_level", "fig8_system needs a [system_level] section".into()),
            (false, Some(_)) => push("system_level", format!("[system_level] is not used by {}", kind.name())),
            (true, Some(s)) => {
                if let Err(m) = s.parsed_policies() {
                    push("system_level.policies", m);
                }
                if s.policies.is_empty() {
                    push("system_level.policies", "needs at least one policy".into());
                }
                for (k, v) in [
                    ("system_level.n_groups", s.n_groups),
                    ("system_level.n_bs", s.n_bs),
                    ("system_level.sync_size", s.sync_size),
                    ("system_level.greedy_min_size", s.greedy_min_size),
                    ("system_level.error_draws", s.error_draws),
                    ("system_level.streams", s.streams),
                    ("system_level.max_outer_iters", s.max_outer_iters),
                    ("system_level.max_nbe_iters", s.max_nbe_iters),
                ] {
                    if v == 0 {
                        push(k, "must be at least 1".into());
                    }
                }
                if s.sync_size > s.n_bs {
                    push("system_level.sync_size", format!("sync_size = {} exceeds n_bs = {}", s.sync_size, s.n_bs));
                }
                if s.greedy_min_size > s.sync_size {
                    push(
                        "system_level.greedy_min_size",
                        format!("greedy_min_size = {} exceeds sync_size = {}", s.greedy_min_size, s.sync_size),
                    );
                }
                if s.streams > s.tx_antennas.min(s.rx_antennas) {
                    push("system_level.streams", "streams exceeds min(tx_antennas, rx_antennas)".into());
                }
                if !(0.0..1.0).contains(&s.an_var) {
                    push("system_level.an_var", format!("an_var = {} must lie in [0, 1)", s.an_var));
                }
                if s.eve_mse_floor < 0.0 || s.eve_mse_floor > s.streams as f64 {
                    push(
                        "system_level.eve_mse_floor",
                        format!("{} outside [0, streams]; an MSE never exceeds tr(I) = streams", s.eve_mse_floor),
                    );
                }
                if !(s.area_km2 > 0.0) || !(s.group_radius_m > 0.0) {
                    push("system_level.area_km2", "area and group radius must be positive".into());
                }
                if !(150.0..=1500.0).contains(&s.carrier_mhz) {
                    push("system_level.carrier_mhz", format!("{} MHz outside the 150-1500 MHz pathloss model range", s.carrier_mhz));
                }
            }
            (false, None) => {}
        }
        out
    }
}

/// One configuration problem, located when possible.
#[derive(Clone, Debug, PartialEq)]
pub struct Issue {
    /// Dotted key, `section.key`.
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// Line (1-based) where dotted `key` is set in `text`, or where its section
/// starts when the key itself is absent.
pub fn locate(text: &str, key: &str) -> Option<usize> {
    let (section, name) = key.rsplit_once('.').unwrap_or(("", key));
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let h = line
            .strip_prefix("[[")
            .and_then(|l| l.strip_suffix("]]"))
            .or_else(|| line.strip_prefix('[').and_then(|l| l.strip_suffix(']')));
        if let Some(h) = h {
            current = h.trim().to_string();
            if (current == section || current == key) && header.is_none() {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == name {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

/// A config that failed to load.
#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    Read { path: String, message: String },
    Parse(Issue),
    Invalid(Vec<Issue>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Read { path, message } => write!(f, "cannot read config {path}: {message}"),
            ConfigError::Parse(i) => write!(f, "{i}"),
            ConfigError::Invalid(list) => {
                for (n, i) in list.iter().enumerate() {
                    if n > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{i}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_issue(text: &str, err: &toml::de::Error) -> Issue {
    let line = err.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    let message = err.message().to_string();
    let key = message
        .split('`')
        .nth(1)
        .map(|k| k.to_string())
        .unwrap_or_else(|| "config".to_string());
    Issue { key, line, message }
}

/// Parses `text` and applies `key=value` overrides (dotted keys; values in
/// TOML syntax, bare words taken as strings). Returns the config without
/// checking invariants.
pub fn parse(text: &str, overrides: &[String]) -> Result<Config, ConfigError> {
    let base: Config = toml::from_str(text).map_err(|e| ConfigError::Parse(parse_issue(text, &e)))?;
    if overrides.is_empty() {
        return Ok(base);
    }
    let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(parse_issue(text, &e)))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let merged = toml::to_string(&table).expect("table serializes");
    toml::from_str(&merged).map_err(|e| {
        ConfigError::Parse(Issue {
            key: "--set".into(),
            line: None,
            message: format!("{} (after overrides {})", e.message(), overrides.join(", ")),
        })
    })
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let bad = |message: String| ConfigError::Parse(Issue { key: "--set".into(), line: None, message });
    let (key, raw) = item.split_once('=').ok_or_else(|| bad(format!("\"{item}\" is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(bad(format!("\"{key}\" is not a dotted key")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(bad(format!("\"{key}\": {p} is not a section"))),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parses, applies overrides and checks invariants, locating every issue
/// in `text` when possible.
pub fn load_str(text: &str, overrides: &[String]) -> Result<Config, ConfigError> {
    let cfg = parse(text, overrides)?;
    let mut issues = cfg.issues();
    if issues.is_empty() {
        return Ok(cfg);
    }
    for i in &mut issues {
        i.line = locate(text, &i.key);
    }
    Err(ConfigError::Invalid(issues))
}

pub fn load(path: &str, overrides: &[String]) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Read { path: path.to_string(), message: e.to_string() })?;
    load_str(&text, overrides)
}

/// Every issue in `text`: a parse failure alone, or all invariant
/// violations.
pub fn diagnose(text: &str) -> Vec<Issue> {
    match load_str(text, &[]) {
        Ok(_) => Vec::new(),
        Err(ConfigError::Parse(i)) => vec![i],
        Err(ConfigError::Invalid(list)) => list,
        Err(ConfigError::Read { .. }) => unreachable!("no file access"),
    }
}

/// Canonical TOML of the resolved config.
pub fn to_canonical(cfg: &Config) -> String {
    toml::to_string(cfg).expect("config serializes")
}
