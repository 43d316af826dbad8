//! Executes a loaded config and renders its CSV tables and manifest.

use std::time::Instant;

use sha2::{Digest, Sha256};

use secmimo::simkit::{
    security_gap, sweep, system_level_run, CsvTable, ExperimentResult, SnrSweep, SweepTemplate,
};
use secmimo::Error;

use crate::config::{to_canonical, Config, ExperimentKind};

/// Version string recorded in manifests.
pub const VERSION: &str = env!("SECMIMO_VERSION");

/// Output of one run, not yet written to disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    /// `(file name, contents)` of every CSV table.
    pub tables: Vec<(String, String)>,
    pub manifest: String,
    /// SNR points or policies where no design succeeded.
    pub failures: Vec<String>,
}

pub fn config_digest(cfg: &Config) -> String {
    let d = Sha256::digest(to_canonical(cfg).as_bytes());
    let hex: String = d.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn template(cfg: &Config, curve: usize) -> SweepTemplate {
    let c = &cfg.curves[curve];
    let (leg, eve) = cfg.assumed(c.design);
    let mut t = SweepTemplate::new(cfg.dims(c.an_var), c.design.kind(), leg, eve, cfg.eval_policy(c.eval));
    t.beta = cfg.solver.beta;
    t.max_outer_iters = cfg.solver.max_outer_iters;
    t.max_nbe_iters = cfg.solver.max_nbe_iters;
    t.error_draws = cfg.sweep.as_ref().map_or(1, |s| s.error_draws);
    t
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("nan".to_string(), |v| format!("{v:.4e}"))
}

/// Runs every curve over the config's SNR grid. All curves share the seed,
/// so they see the same channel estimates.
fn curves(cfg: &Config, log: &mut dyn FnMut(String)) -> Result<Vec<(String, ExperimentResult)>, Error> {
    let grid = cfg.snr_sweep().expect("validated sweep");
    let digest = config_digest(cfg);
    let mut out = Vec::new();
    for (i, c) in cfg.curves.iter().enumerate() {
        let started = Instant::now();
        let mut r = sweep(&template(cfg, i), &grid, cfg.seed)?;
        r.config_digest = digest.clone();
        for p in &r.points {
            log(format!(
                "event=point experiment={} curve={} snr_db={} ber_legit={} ber_eve={} mse_legit={:.4e} mse_eve={:.4e} trials={} nonconverged={} failed={}",
                cfg.experiment.name(),
                c.policy(),
                p.snr_db,
                fmt_opt(p.ber_legit),
                fmt_opt(p.ber_eve),
                p.mse_legit,
                p.mse_eve,
                p.trials,
                p.nonconverged,
                p.failed
            ));
        }
        log(format!(
            "event=curve experiment={} curve={} elapsed_s={:.1}",
            cfg.experiment.name(),
            c.policy(),
            started.elapsed().as_secs_f64()
        ));
        out.push((c.policy(), r));
    }
    Ok(out)
}

/// Computes every table of `cfg`. Progress lines go to `log`.
pub fn execute(cfg: &Config, log: &mut dyn FnMut(String)) -> Result<Artifacts, Error> {
    let name = cfg.experiment.name();
    let mut tables = Vec::new();
    let mut failures = Vec::new();
    log(format!("event=start experiment={name} seed={} digest={}", cfg.seed, config_digest(cfg)));
    let started = Instant::now();

    match cfg.experiment {
        ExperimentKind::Fig7Threshold => {
            let th = cfg.threshold.as_ref().expect("validated threshold");
            let grid = SnrSweep { points: vec![th.snr_db], trials_per_point: th.trials, symbols_per_trial: 0 };
            let mut table = CsvTable::thresholds()?;
            for (i, c) in cfg.curves.iter().enumerate() {
                for &gamma in &th.gamma {
                    let mut t = template(cfg, i);
                    t.dims.eve_mse_floor = gamma;
                    t.error_draws = th.error_draws;
                    let r = sweep(&t, &grid, cfg.seed)?;
                    let p = &r.points[0];
                    if p.trials == 0 {
                        failures.push(format!("{} gamma={gamma}", c.policy()));
                    }
                    log(format!(
                        "event=threshold experiment={name} curve={} gamma={gamma} mse_eve={:.4e} trials={} nonconverged={}",
                        c.policy(),
                        p.mse_eve,
                        p.trials,
                        p.nonconverged
                    ));
                    table.threshold_row(name, &c.policy(), gamma, p)?;
                }
            }
            tables.push(("thresholds.csv".to_string(), table.finish()?));
        }
        ExperimentKind::Fig8System => {
            let s = cfg.system_level.as_ref().expect("validated system_level");
            let params = s.params(cfg.solver.beta);
            let policies = s.parsed_policies().map_err(Error::InvalidInput)?;
            let mut table = CsvTable::groups()?;
            for (policy, label) in policies {
                let t0 = Instant::now();
                let groups = system_level_run(&params, policy, cfg.seed)?;
                let ok: Vec<_> = groups.iter().filter(|g| !g.failed).collect();
                if ok.is_empty() {
                    failures.push(label.clone());
                }
                log(format!(
                    "event=policy experiment={name} policy={label} groups={} failed={} nonconverged={} median_ber_legit={} median_ber_eve={} elapsed_s={:.1}",
                    groups.len(),
                    groups.len() - ok.len(),
                    ok.iter().filter(|g| !g.converged).count(),
                    fmt_opt(median(ok.iter().map(|g| g.ber_legit).collect())),
                    fmt_opt(median(ok.iter().map(|g| g.ber_eve).collect())),
                    t0.elapsed().as_secs_f64()
                ));
                for g in &groups {
                    table.group_row(name, &label, g)?;
                }
            }
            tables.push(("groups.csv".to_string(), table.finish()?));
        }
        _ => {
            let results = curves(cfg, log)?;
            let mut table = CsvTable::curves()?;
            for (policy, r) in &results {
                for p in &r.points {
                    if p.trials == 0 {
                        failures.push(format!("{policy} snr_db={}", p.snr_db));
                    }
                    table.curve_row(name, policy, p)?;
                }
            }
            tables.push(("curves.csv".to_string(), table.finish()?));
            if cfg.experiment == ExperimentKind::Fig5Gap {
                let g = cfg.gap.clone().unwrap_or_default();
                let mut gaps = CsvTable::gaps()?;
                for (policy, r) in &results {
                    let gap = security_gap(&r.legit_curve(), &r.eve_curve(), g.target_legit, g.target_eve).ok();
                    log(format!(
                        "event=gap experiment={name} curve={policy} gap_db={}",
                        fmt_opt(gap.map(|x| x.gap_db))
                    ));
                    gaps.gap_row(name, policy, g.target_legit, g.target_eve, gap.as_ref())?;
                }
                tables.push(("gaps.csv".to_string(), gaps.finish()?));
            }
        }
    }
    log(format!("event=done experiment={name} elapsed_s={:.1}", started.elapsed().as_secs_f64()));
    Ok(Artifacts { manifest: manifest(cfg, &tables), tables, failures })
}

/// Median of the finite values, `None` when there are none.
pub fn median(mut v: Vec<f64>) -> Option<f64> {
    v.retain(|x| x.is_finite());
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn manifest(cfg: &Config, tables: &[(String, String)]) -> String {
    let mut doc = toml::Table::new();
    doc.insert("version".into(), VERSION.into());
    doc.insert("experiment".into(), cfg.experiment.name().into());
    doc.insert("seed".into(), toml::Value::Integer(cfg.seed as i64));
    doc.insert("config_digest".into(), config_digest(cfg).into());
    let files: Vec<toml::Value> = tables.iter().map(|(n, _)| n.clone().into()).collect();
    doc.insert("files".into(), files.into());
    let resolved = toml::Table::try_from(cfg).expect("config serializes");
    doc.insert("config".into(), resolved.into());
    toml::to_string(&doc).expect("manifest serializes")
}
