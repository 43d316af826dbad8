//! System-level driver: random layouts, clustering, design and BER per group.
//!
//! Powers are normalized to the noise floor: a link's gain becomes
//! `pathloss_gain * P_T / N0`, the noise variance is 1 plus the interference
//! power of every BS outside the serving cluster, and `max_power` is 1.

use super::link::run_link_trial;
use super::sweep::{design_for, DesignKind, ErrorPolicy, SweepTemplate};
use crate::channel::{generate_system_scenario, ChannelSet, LayoutParams, LinkTable, SystemDims};
use crate::clustering::{select_cluster, ClusterRequest, ClusteringPolicy};
use crate::error::{Error, Result};
use crate::numerics::{c, SimRng};

#[derive(Clone, Debug, PartialEq)]
pub struct SystemLevelParams {
    pub layout: LayoutParams,
    pub n_groups: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub eve_antennas: usize,
    pub streams: usize,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub an_var: f64,
    /// Squared error radii relative to each link's normalized gain.
    pub tau_leg: f64,
    pub tau_eve: f64,
    pub eve_mse_floor: f64,
    pub symbols: usize,
    pub error_draws: usize,
    pub beta: f64,
    pub max_outer_iters: usize,
    pub max_nbe_iters: usize,
}

impl Default for SystemLevelParams {
    fn default() -> Self {
        Self {
            layout: LayoutParams::default(),
            n_groups: 30,
            tx_antennas: 16,
            rx_antennas: 8,
            eve_antennas: 4,
            streams: 2,
            tx_power_dbm: 46.0,
            // Thermal noise over 10 MHz with a 9 dB noise figure.
            noise_dbm: -95.0,
            an_var: 0.04,
            tau_leg: 0.04,
            tau_eve: 0.09,
            eve_mse_floor: 0.5,
            symbols: 2000,
            error_draws: 4,
            beta: 1e-4,
            max_outer_iters: 10,
            max_nbe_iters: 8,
        }
    }
}

/// Outcome of one group under one clustering policy.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupOutcome {
    pub group: usize,
    pub cluster: Vec<usize>,
    pub ber_legit: f64,
    pub ber_eve: f64,
    pub converged: bool,
    /// Set when the design failed; the BERs are then NaN.
    pub failed: bool,
}

/// Runs every group under `policy`.
///
/// Group `g` draws its layout and channels from substream `g` of the seed's
/// stream, so different policies see identical groups.
pub fn system_level_run(params: &SystemLevelParams, policy: ClusteringPolicy, seed: u64) -> Result<Vec<GroupOutcome>> {
    if params.n_groups == 0 || params.error_draws == 0 {
        return Err(Error::InvalidInput("n_groups and error_draws must be at least 1".into()));
    }
    let rng = SimRng::new(seed);
    (0..params.n_groups).map(|g| run_group(params, policy, g, &rng.substream(g as u64))).collect()
}

fn run_group(params: &SystemLevelParams, policy: ClusteringPolicy, group: usize, rng: &SimRng) -> Result<GroupOutcome> {
    let layout = generate_system_scenario(&params.layout, &mut rng.substream(0))?;
    let scale = 10f64.powf((params.tx_power_dbm - params.noise_dbm) / 10.0);
    let normalize = |table: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        table.into_iter().map(|row| row.into_iter().map(|g| g * scale).collect()).collect()
    };
    let (h_bs, h_ue) = (params.layout.h_bs_m, params.layout.h_ue_m);
    let user_gain = normalize(layout.gains_to(&layout.user_positions, h_bs, h_ue));
    let eve_gain = normalize(layout.gains_to(&layout.eve_positions, h_bs, h_ue));

    let min_size = match policy {
        ClusteringPolicy::Greedy(k) => k,
        _ => 1,
    };
    let request = ClusterRequest::for_layout(&layout, min_size, 1.0, 1.0);
    let cluster = select_cluster(policy, &request, &user_gain)?;

    let n_users = layout.user_positions.len();
    let n_eves = layout.eve_positions.len();
    let interference = |gain: &[Vec<f64>], r: usize| -> f64 {
        (0..gain.len()).filter(|t| !cluster.contains(t)).map(|t| gain[t][r]).sum()
    };
    let dims = SystemDims {
        n_bs: cluster.len(),
        n_users,
        n_eves,
        tx_antennas: params.tx_antennas,
        rx_antennas: params.rx_antennas,
        eve_antennas: params.eve_antennas,
        streams: params.streams,
        max_power: 1.0,
        noise_var_user: (0..n_users).map(|l| 1.0 + interference(&user_gain, l)).collect(),
        noise_var_eve: (0..n_eves).map(|e| 1.0 + interference(&eve_gain, e)).collect(),
        an_var: vec![params.an_var; cluster.len()],
        eve_mse_floor: params.eve_mse_floor,
    };
    let leg_scale = LinkTable::from_fn(dims.n_bs, n_users, |t, l| user_gain[cluster[t]][l]);
    let eve_scale = LinkTable::from_fn(dims.n_bs, n_eves, |t, e| eve_gain[cluster[t]][e]);

    let eval = ErrorPolicy::norm_bounded(params.tau_leg, params.tau_eve);
    let (leg_err, eve_err) = eval.models(&dims, Some((&leg_scale, &eve_scale)));
    let mut estimate = ChannelSet::rayleigh(&dims, leg_err, eve_err, &mut rng.substream(1));
    for t in 0..dims.n_bs {
        for l in 0..n_users {
            estimate.c_hat[t][l] *= c(leg_scale.get(t, l).sqrt(), 0.0);
        }
        for e in 0..n_eves {
            estimate.g_hat[t][e] *= c(eve_scale.get(t, e).sqrt(), 0.0);
        }
    }

    let mut template =
        SweepTemplate::new(dims.clone(), DesignKind::RobustNormBounded, params.tau_leg, params.tau_eve, eval);
    template.beta = params.beta;
    template.max_outer_iters = params.max_outer_iters;
    template.max_nbe_iters = params.max_nbe_iters;
    let designed = design_for(&template, &dims, &estimate, Some((&leg_scale, &eve_scale)), &mut rng.substream(2));
    let (sol, converged) = match designed {
        Ok(d) => d,
        Err(Error::InvalidInput(m)) => return Err(Error::InvalidInput(m)),
        Err(_) => {
            return Ok(GroupOutcome {
                group,
                cluster,
                ber_legit: f64::NAN,
                ber_eve: f64::NAN,
                converged: false,
                failed: true,
            })
        }
    };

    let mut err_rng = rng.substream(3);
    let mut data_rng = rng.substream(4);
    let (mut le, mut lb, mut ee, mut eb) = (0u64, 0u64, 0u64, 0u64);
    let draws = params.error_draws;
    for k in 0..draws {
        let n = params.symbols / draws + usize::from(k < params.symbols % draws);
        if n == 0 {
            continue;
        }
        let truth = estimate.realize(&mut err_rng);
        let out = run_link_trial(&sol, &truth, &dims, n, &mut data_rng)?;
        le += out.user_bit_errors.iter().sum::<u64>();
        lb += out.bits * n_users as u64;
        ee += out.eve_bit_errors.iter().sum::<u64>();
        eb += out.bits * n_eves as u64;
    }
    let ratio = |e: u64, b: u64| if b == 0 { f64::NAN } else { e as f64 / b as f64 };
    Ok(GroupOutcome {
        group,
        cluster,
        ber_legit: ratio(le, lb),
        ber_eve: ratio(ee, eb),
        converged,
        failed: false,
    })
}
