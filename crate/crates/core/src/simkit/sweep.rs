//! Monte-Carlo BER/MSE curves over transmit SNR.

use rayon::prelude::*;

use super::link::run_link_trial;
use crate::channel::{ChannelSet, ErrorModel, LinkTable, SystemDims};
use crate::design::{coordinate_descent, nbe_design, DesignProblem};
use crate::error::{Error, Result};
use crate::mse::{mse_eavesdropper, mse_legitimate, RobustFlags, TransceiverSolution, UncertaintyInput};
use crate::numerics::SimRng;

/// Which transceiver design a curve uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DesignKind {
    /// Non-robust design on the true channels, evaluated without errors.
    Perfect,
    /// Non-robust design on the estimates.
    NonRobust,
    /// Robust to stochastic errors.
    RobustStochastic,
    /// Robust to norm-bounded errors.
    RobustNormBounded,
}

impl DesignKind {
    pub const ALL: [DesignKind; 4] =
        [DesignKind::Perfect, DesignKind::NonRobust, DesignKind::RobustStochastic, DesignKind::RobustNormBounded];

    /// Short label used in CSV files and configs.
    pub fn label(self) -> &'static str {
        match self {
            DesignKind::Perfect => "Perfect",
            DesignKind::NonRobust => "NR",
            DesignKind::RobustStochastic => "R-SE",
            DesignKind::RobustNormBounded => "R-NBE",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label().eq_ignore_ascii_case(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Perfect,
    Stochastic,
    NormBounded,
}

/// The same error model on every link of a side: per-entry variances for
/// `Stochastic`, squared radii for `NormBounded`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorPolicy {
    pub kind: ErrorKind,
    pub leg: f64,
    pub eve: f64,
}

impl ErrorPolicy {
    pub const PERFECT: ErrorPolicy = ErrorPolicy { kind: ErrorKind::Perfect, leg: 0.0, eve: 0.0 };

    pub fn stochastic(leg: f64, eve: f64) -> Self {
        Self { kind: ErrorKind::Stochastic, leg, eve }
    }

    pub fn norm_bounded(leg: f64, eve: f64) -> Self {
        Self { kind: ErrorKind::NormBounded, leg, eve }
    }

    /// Models for users and eavesdroppers, each link's scalar multiplied by
    /// its entry in `scale` (`[bs][user]` then `[bs][eve]`) when given.
    pub fn models(&self, dims: &SystemDims, scale: Option<(&LinkTable, &LinkTable)>) -> (ErrorModel, ErrorModel) {
        let table = |n_rx: usize, v: f64, s: Option<&LinkTable>| {
            LinkTable::from_fn(dims.n_bs, n_rx, |t, r| v * s.map_or(1.0, |s| s.get(t, r)))
        };
        let leg = table(dims.n_users, self.leg, scale.map(|s| s.0));
        let eve = table(dims.n_eves, self.eve, scale.map(|s| s.1));
        match self.kind {
            ErrorKind::Perfect => (ErrorModel::Perfect, ErrorModel::Perfect),
            ErrorKind::Stochastic => (ErrorModel::Stochastic(leg), ErrorModel::Stochastic(eve)),
            ErrorKind::NormBounded => (ErrorModel::NormBounded(leg), ErrorModel::NormBounded(eve)),
        }
    }
}

/// Transmit-SNR grid and Monte-Carlo effort.
#[derive(Clone, Debug, PartialEq)]
pub struct SnrSweep {
    pub points: Vec<f64>,
    pub trials_per_point: usize,
    pub symbols_per_trial: usize,
}

impl SnrSweep {
    pub fn check(&self) -> Result<()> {
        if self.points.is_empty() || self.points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("SNR points must be nonempty and strictly ascending".into()));
        }
        if self.trials_per_point == 0 {
            return Err(Error::InvalidInput("trials_per_point must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything except the SNR that defines one curve.
#[derive(Clone, Debug)]
pub struct SweepTemplate {
    /// Dimensions and parameters; the noise variances are replaced by
    /// `max_power / SNR` at each point.
    pub dims: SystemDims,
    pub design: DesignKind,
    /// Uncertainty assumed by the robust designs (variances for `R-SE`,
    /// squared radii for `R-NBE`).
    pub assumed_leg: f64,
    pub assumed_eve: f64,
    /// Errors between estimates and true channels in evaluation.
    pub eval: ErrorPolicy,
    /// Independent true-error draws per trial; the symbols are split evenly.
    pub error_draws: usize,
    pub beta: f64,
    pub max_outer_iters: usize,
    pub max_nbe_iters: usize,
}

impl SweepTemplate {
    pub fn new(dims: SystemDims, design: DesignKind, assumed_leg: f64, assumed_eve: f64, eval: ErrorPolicy) -> Self {
        Self {
            dims,
            design,
            assumed_leg,
            assumed_eve,
            eval,
            error_draws: 1,
            beta: 1e-4,
            max_outer_iters: 50,
            max_nbe_iters: 30,
        }
    }

    pub fn check(&self) -> Result<()> {
        if let Some(first) = self.dims.issues().first() {
            return Err(Error::InvalidInput(first.clone()));
        }
        if self.error_draws == 0 {
            return Err(Error::InvalidInput("error_draws must be at least 1".into()));
        }
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !ok(self.assumed_leg) || !ok(self.assumed_eve) || !ok(self.eval.leg) || !ok(self.eval.eve) {
            return Err(Error::InvalidInput("error scalars must be finite and nonnegative".into()));
        }
        Ok(())
    }

    fn dims_at(&self, snr_db: f64) -> SystemDims {
        let noise = self.dims.max_power / 10f64.powf(snr_db / 10.0);
        SystemDims {
            noise_var_user: vec![noise; self.dims.n_users],
            noise_var_eve: vec![noise; self.dims.n_eves],
            ..self.dims.clone()
        }
    }
}

/// Aggregates at one SNR point. BER fields are `None` when no symbols were
/// simulated. Half-widths are 95% normal-approximation intervals: binomial
/// over all bits for BER, over trial-level samples for MSE.
#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub snr_db: f64,
    pub ber_legit: Option<f64>,
    pub ber_legit_hw: Option<f64>,
    pub ber_eve: Option<f64>,
    pub ber_eve_hw: Option<f64>,
    /// Closed-form MSE on the realized true channels, averaged over users,
    /// error draws and trials.
    pub mse_legit: f64,
    pub mse_legit_hw: f64,
    pub mse_eve: f64,
    pub mse_eve_hw: f64,
    /// Trials that produced a design.
    pub trials: usize,
    /// Designs that hit their iteration cap.
    pub nonconverged: usize,
    /// Trials whose design failed outright.
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub points: Vec<PointResult>,
    pub seed: u64,
    pub config_digest: String,
}

impl ExperimentResult {
    /// `(snr_db, ber_legit)` for points with a BER estimate.
    pub fn legit_curve(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(|p| p.ber_legit.map(|b| (p.snr_db, b))).collect()
    }

    pub fn eve_curve(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(|p| p.ber_eve.map(|b| (p.snr_db, b))).collect()
    }
}

/// Per-trial sums; merged in trial order.
#[derive(Clone, Debug, Default)]
struct TrialSums {
    legit_errors: u64,
    legit_bits: u64,
    eve_errors: u64,
    eve_bits: u64,
    mse_legit: Vec<f64>,
    mse_eve: Vec<f64>,
    nonconverged: bool,
}

/// Runs the configured design on estimated channels `estimate`.
pub fn design_for(
    template: &SweepTemplate,
    dims: &SystemDims,
    estimate: &ChannelSet,
    assumed_scale: Option<(&LinkTable, &LinkTable)>,
    rng: &mut SimRng,
) -> Result<(TransceiverSolution, bool)> {
    let with_models = |policy: ErrorPolicy| {
        let (leg, eve) = policy.models(dims, assumed_scale);
        ChannelSet { leg_error: leg, eve_error: eve, ..estimate.clone() }
    };
    let tune = |mut p: DesignProblem| {
        p.beta = template.beta;
        p.max_outer_iters = template.max_outer_iters;
        p.max_nbe_iters = template.max_nbe_iters;
        p
    };
    match template.design {
        DesignKind::Perfect | DesignKind::NonRobust => {
            let p = tune(DesignProblem::non_robust(dims.clone(), with_models(ErrorPolicy::PERFECT)));
            coordinate_descent(&p, rng).map(|(s, r)| (s, r.converged))
        }
        DesignKind::RobustStochastic => {
            let ch = with_models(ErrorPolicy::stochastic(template.assumed_leg, template.assumed_eve));
            let p = tune(DesignProblem::robust(dims.clone(), ch));
            coordinate_descent(&p, rng).map(|(s, r)| (s, r.converged))
        }
        DesignKind::RobustNormBounded => {
            let ch = with_models(ErrorPolicy::norm_bounded(template.assumed_leg, template.assumed_eve));
            let p = tune(DesignProblem::robust(dims.clone(), ch));
            nbe_design(&p, rng).map(|(s, _, r)| (s, r.converged))
        }
    }
}

/// Closed-form MSEs of every user and eavesdropper on known channels.
pub(crate) fn realized_mses(
    sol: &TransceiverSolution,
    truth: &ChannelSet,
    dims: &SystemDims,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let u = UncertaintyInput::zeros(dims);
    let f = RobustFlags::NON_ROBUST;
    let leg = (0..dims.n_users).map(|l| mse_legitimate(sol, truth, dims, f, &u, l)).collect::<Result<_>>()?;
    let eve = (0..dims.n_eves).map(|e| mse_eavesdropper(sol, truth, dims, f, &u, e)).collect::<Result<_>>()?;
    Ok((leg, eve))
}

fn run_trial(template: &SweepTemplate, dims: &SystemDims, symbols: usize, rng: &SimRng) -> Result<TrialSums> {
    let eval = if template.design == DesignKind::Perfect { ErrorPolicy::PERFECT } else { template.eval };
    let (leg_err, eve_err) = eval.models(dims, None);
    let estimate = ChannelSet::rayleigh(dims, leg_err, eve_err, &mut rng.substream(0));
    let (sol, converged) = design_for(template, dims, &estimate, None, &mut rng.substream(1))?;
    let mut sums = TrialSums { nonconverged: !converged, ..Default::default() };
    let mut err_rng = rng.substream(2);
    let mut data_rng = rng.substream(3);
    let draws = template.error_draws;
    for k in 0..draws {
        let truth = estimate.realize(&mut err_rng);
        let (leg, eve) = realized_mses(&sol, &truth, dims)?;
        sums.mse_legit.push(leg.iter().sum::<f64>() / leg.len() as f64);
        if !eve.is_empty() {
            sums.mse_eve.push(eve.iter().sum::<f64>() / eve.len() as f64);
        }
        let n = symbols / draws + usize::from(k < symbols % draws);
        if n > 0 {
            let out = run_link_trial(&sol, &truth, dims, n, &mut data_rng)?;
            sums.legit_errors += out.user_bit_errors.iter().sum::<u64>();
            sums.legit_bits += out.bits * dims.n_users as u64;
            sums.eve_errors += out.eve_bit_errors.iter().sum::<u64>();
            sums.eve_bits += out.bits * dims.n_eves as u64;
        }
    }
    Ok(sums)
}

fn mean_hw(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

fn ber_hw(errors: u64, bits: u64) -> (Option<f64>, Option<f64>) {
    if bits == 0 {
        return (None, None);
    }
    let p = errors as f64 / bits as f64;
    (Some(p), Some(1.96 * (p * (1.0 - p) / bits as f64).sqrt()))
}

/// One curve: for every SNR point and trial, draw estimated channels, design,
/// then evaluate on independently drawn true channels.
///
/// Trial `k` of point `i` uses substream `k` of substream `i` of the seed's
/// stream, so results do not depend on scheduling. Failed designs are counted
/// and skipped.
pub fn sweep(template: &SweepTemplate, grid: &SnrSweep, seed: u64) -> Result<ExperimentResult> {
    template.check()?;
    grid.check()?;
    let rng = SimRng::new(seed);
    let mut points = Vec::with_capacity(grid.points.len());
    for (i, &snr) in grid.points.iter().enumerate() {
        let dims = template.dims_at(snr);
        let point_rng = rng.substream(i as u64);
        let trials: Vec<Result<TrialSums>> = (0..grid.trials_per_point)
            .into_par_iter()
            .map(|k| run_trial(template, &dims, grid.symbols_per_trial, &point_rng.substream(k as u64)))
            .collect();
        let mut total = TrialSums::default();
        let (mut ok, mut failed, mut nonconverged) = (0, 0, 0);
        for t in trials {
            match t {
                Ok(s) => {
                    ok += 1;
                    nonconverged += usize::from(s.nonconverged);
                    total.legit_errors += s.legit_errors;
                    total.legit_bits += s.legit_bits;
                    total.eve_errors += s.eve_errors;
                    total.eve_bits += s.eve_bits;
                    total.mse_legit.extend(s.mse_legit);
                    total.mse_eve.extend(s.mse_eve);
                }
                Err(Error::InvalidInput(m)) => return Err(Error::InvalidInput(m)),
                Err(_) => failed += 1,
            }
        }
        let (ber_legit, ber_legit_hw) = ber_hw(total.legit_errors, total.legit_bits);
        let (ber_eve, ber_eve_hw) = ber_hw(total.eve_errors, total.eve_bits);
        let (mse_legit, mse_legit_hw) = mean_hw(&total.mse_legit);
        let (mse_eve, mse_eve_hw) = mean_hw(&total.mse_eve);
        points.push(PointResult {
            snr_db: snr,
            ber_legit,
            ber_legit_hw,
            ber_eve,
            ber_eve_hw,
            mse_legit,
            mse_legit_hw,
            mse_eve,
            mse_eve_hw,
            trials: ok,
            nonconverged,
            failed,
        });
    }
    Ok(ExperimentResult { points, seed, config_digest: String::new() })
}
