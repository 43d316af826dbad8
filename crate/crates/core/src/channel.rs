//! Problem dimensions, channel and CSI-error generation, pathloss, and
//! network layouts for the system-level experiments.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, SimRng};

/// Dimensions, power budget and noise levels of one design problem.
///
/// Noise and artificial-noise levels are stored as variances.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemDims {
    /// Base stations (K_T).
    pub n_bs: usize,
    /// Legitimate users (K_R).
    pub n_users: usize,
    /// Eavesdroppers (K_E).
    pub n_eves: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub eve_antennas: usize,
    pub streams: usize,
    /// Per-BS power budget P_T.
    pub max_power: f64,
    pub noise_var_user: Vec<f64>,
    pub noise_var_eve: Vec<f64>,
    /// Artificial-noise variance per BS.
    pub an_var: Vec<f64>,
    /// Lower bound Γ on every eavesdropper's MSE.
    pub eve_mse_floor: f64,
}

impl SystemDims {
    /// Dimensions with the same noise level at every receiver and the same AN
    /// variance at every BS.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        n_bs: usize,
        n_users: usize,
        n_eves: usize,
        tx_antennas: usize,
        rx_antennas: usize,
        eve_antennas: usize,
        streams: usize,
        max_power: f64,
        noise_var: f64,
        an_var: f64,
        eve_mse_floor: f64,
    ) -> Self {
        Self {
            n_bs,
            n_users,
            n_eves,
            tx_antennas,
            rx_antennas,
            eve_antennas,
            streams,
            max_power,
            noise_var_user: vec![noise_var; n_users],
            noise_var_eve: vec![noise_var; n_eves],
            an_var: vec![an_var; n_bs],
            eve_mse_floor,
        }
    }

    /// Every violated invariant, as human-readable messages.
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("n_bs", self.n_bs),
            ("n_users", self.n_users),
            ("tx_antennas", self.tx_antennas),
            ("rx_antennas", self.rx_antennas),
            ("eve_antennas", self.eve_antennas),
            ("streams", self.streams),
        ] {
            if v == 0 {
                out.push(format!("{name} must be at least 1"));
            }
        }
        if self.streams > self.tx_antennas.min(self.rx_antennas) {
            out.push(format!(
                "streams = {} exceeds min(tx_antennas, rx_antennas) = {}",
                self.streams,
                self.tx_antennas.min(self.rx_antennas)
            ));
        }
        if !(self.max_power > 0.0 && self.max_power.is_finite()) {
            out.push(format!("max_power must be positive, got {}", self.max_power));
        }
        if self.eve_mse_floor < 0.0 || self.eve_mse_floor > self.streams as f64 {
            out.push(format!(
                "eve_mse_floor = {} outside [0, streams = {}]; an MSE never exceeds tr(I) = streams",
                self.eve_mse_floor, self.streams
            ));
        }
        if self.noise_var_user.len() != self.n_users {
            out.push("noise_var_user length differs from n_users".into());
        }
        if self.noise_var_eve.len() != self.n_eves {
            out.push("noise_var_eve length differs from n_eves".into());
        }
        if self.an_var.len() != self.n_bs {
            out.push("an_var length differs from n_bs".into());
        }
        let negative = |v: &[f64]| v.iter().any(|x| !(*x >= 0.0 && x.is_finite()));
        if negative(&self.noise_var_user) || negative(&self.noise_var_eve) {
            out.push("noise variances must be finite and nonnegative".into());
        }
        if negative(&self.an_var) {
            out.push("an_var must be finite and nonnegative".into());
        }
        if let Some(t) = self.an_var.iter().position(|&z| z >= self.max_power) {
            out.push(format!("an_var at BS {t} leaves no power for data"));
        }
        out
    }
}

/// Per-link scalar table indexed by (BS, receiver).
#[derive(Clone, Debug, PartialEq)]
pub struct LinkTable {
    n_bs: usize,
    n_rx: usize,
    values: Vec<f64>,
}

impl LinkTable {
    pub fn uniform(n_bs: usize, n_rx: usize, value: f64) -> Self {
        Self { n_bs, n_rx, values: vec![value; n_bs * n_rx] }
    }

    pub fn from_fn(n_bs: usize, n_rx: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(n_bs * n_rx);
        for t in 0..n_bs {
            for r in 0..n_rx {
                values.push(f(t, r));
            }
        }
        Self { n_bs, n_rx, values }
    }

    pub fn get(&self, t: usize, r: usize) -> f64 {
        self.values[t * self.n_rx + r]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_bs, self.n_rx)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Error model for one link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinkError {
    Perfect,
    /// Per-entry variance.
    Stochastic(f64),
    /// Squared Frobenius radius.
    NormBounded(f64),
}

/// CSI-error model for all links on one side (users or eavesdroppers).
///
/// `Stochastic` holds the per-entry error variance, so that for an `r x c`
/// error `E[tr(X U X^H V)] = sigma^2 tr(U) tr(V)` for every `U`, `V`.
#[derive(Clone, Debug, PartialEq)]
pub enum ErrorModel {
    Perfect,
    Stochastic(LinkTable),
    NormBounded(LinkTable),
}

impl ErrorModel {
    pub fn link(&self, t: usize, r: usize) -> LinkError {
        match self {
            ErrorModel::Perfect => LinkError::Perfect,
            ErrorModel::Stochastic(tab) => LinkError::Stochastic(tab.get(t, r)),
            ErrorModel::NormBounded(tab) => LinkError::NormBounded(tab.get(t, r)),
        }
    }

    /// The scalar the closed-form MSEs use for this model (0, sigma^2 or tau).
    pub fn scalar(&self, t: usize, r: usize) -> f64 {
        match self.link(t, r) {
            LinkError::Perfect => 0.0,
            LinkError::Stochastic(v) | LinkError::NormBounded(v) => v,
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            ErrorModel::Perfect => true,
            ErrorModel::Stochastic(t) | ErrorModel::NormBounded(t) => {
                t.values().iter().all(|v| *v >= 0.0 && v.is_finite())
            }
        }
    }
}

/// Estimated channels plus the error models that describe their accuracy.
#[derive(Clone, Debug)]
pub struct ChannelSet {
    /// `c_hat[t][l]`: BS t to user l, `rx_antennas x tx_antennas`.
    pub c_hat: Vec<Vec<ComplexMatrix>>,
    /// `g_hat[t][e]`: BS t to eavesdropper e, `eve_antennas x tx_antennas`.
    pub g_hat: Vec<Vec<ComplexMatrix>>,
    pub leg_error: ErrorModel,
    pub eve_error: ErrorModel,
}

impl ChannelSet {
    /// Unit-gain Rayleigh estimates for every link.
    pub fn rayleigh(
        dims: &SystemDims,
        leg_error: ErrorModel,
        eve_error: ErrorModel,
        rng: &mut SimRng,
    ) -> Self {
        let c_hat = (0..dims.n_bs)
            .map(|_| {
                (0..dims.n_users)
                    .map(|_| rng.complex_gaussian(dims.rx_antennas, dims.tx_antennas, 1.0))
                    .collect()
            })
            .collect();
        let g_hat = (0..dims.n_bs)
            .map(|_| {
                (0..dims.n_eves)
                    .map(|_| rng.complex_gaussian(dims.eve_antennas, dims.tx_antennas, 1.0))
                    .collect()
            })
            .collect();
        Self { c_hat, g_hat, leg_error, eve_error }
    }

    /// Checks every matrix against `dims`.
    pub fn check(&self, dims: &SystemDims) -> Result<()> {
        let bad = |what: &str| Err(Error::ShapeMismatch(what.to_string()));
        if self.c_hat.len() != dims.n_bs || self.g_hat.len() != dims.n_bs {
            return bad("channel tables must have one row per BS");
        }
        for t in 0..dims.n_bs {
            if self.c_hat[t].len() != dims.n_users || self.g_hat[t].len() != dims.n_eves {
                return bad("channel table row has wrong receiver count");
            }
            if self.c_hat[t]
                .iter()
                .any(|m| m.shape() != (dims.rx_antennas, dims.tx_antennas))
            {
                return bad("user channel shape");
            }
            if self.g_hat[t]
                .iter()
                .any(|m| m.shape() != (dims.eve_antennas, dims.tx_antennas))
            {
                return bad("eavesdropper channel shape");
            }
        }
        Ok(())
    }

    /// One realization of the true channels: estimate plus a drawn error.
    /// The result carries `Perfect` error models.
    pub fn realize(&self, rng: &mut SimRng) -> ChannelSet {
        let c_hat = self
            .c_hat
            .iter()
            .enumerate()
            .map(|(t, row)| {
                row.iter()
                    .enumerate()
                    .map(|(l, c)| {
                        c + draw_error(self.leg_error.link(t, l), c.nrows(), c.ncols(), rng)
                    })
                    .collect()
            })
            .collect();
        let g_hat = self
            .g_hat
            .iter()
            .enumerate()
            .map(|(t, row)| {
                row.iter()
                    .enumerate()
                    .map(|(e, g)| {
                        g + draw_error(self.eve_error.link(t, e), g.nrows(), g.ncols(), rng)
                    })
                    .collect()
            })
            .collect();
        ChannelSet { c_hat, g_hat, leg_error: ErrorModel::Perfect, eve_error: ErrorModel::Perfect }
    }
}

/// `rows x cols` matrix with i.i.d. `CN(0, pathloss_gain)` entries.
pub fn draw_rayleigh_channel(
    rows: usize,
    cols: usize,
    pathloss_gain: f64,
    rng: &mut SimRng,
) -> Result<ComplexMatrix> {
    if !(pathloss_gain > 0.0 && pathloss_gain.is_finite()) {
        return Err(Error::InvalidInput(format!("pathloss gain must be positive, got {pathloss_gain}")));
    }
    Ok(rng.complex_gaussian(rows, cols, pathloss_gain))
}

/// One CSI-error realization for a `rows x cols` link.
///
/// Stochastic errors have i.i.d. `CN(0, sigma^2)` entries. Norm-bounded
/// errors are uniform on the Frobenius ball of squared radius `tau`.
pub fn draw_error(model: LinkError, rows: usize, cols: usize, rng: &mut SimRng) -> ComplexMatrix {
    match model {
        LinkError::Perfect => ComplexMatrix::zeros(rows, cols),
        LinkError::Stochastic(var) => rng.complex_gaussian(rows, cols, var),
        LinkError::NormBounded(tau) => {
            let dir = rng.complex_gaussian(rows, cols, 1.0);
            let norm = dir.norm();
            if norm == 0.0 || tau == 0.0 {
                return ComplexMatrix::zeros(rows, cols);
            }
            let real_dim = (2 * rows * cols) as f64;
            let radius = tau.sqrt() * rng.uniform().powf(1.0 / real_dim);
            dir * num_complex::Complex64::new(radius / norm, 0.0)
        }
    }
}

/// Urban Okumura-Hata loss in dB with the small/medium-city mobile correction.
/// Distances below 1 m are clamped.
pub fn okumura_hata_loss_db(distance_m: f64, freq_hz: f64, h_bs_m: f64, h_ue_m: f64) -> f64 {
    let f = (freq_hz / 1e6).log10();
    let a_ue = (1.1 * f - 0.7) * h_ue_m - (1.56 * f - 0.8);
    let d_km = (distance_m / 1000.0).max(0.001);
    69.55 + 26.16 * f - 13.82 * h_bs_m.log10() - a_ue
        + (44.9 - 6.55 * h_bs_m.log10()) * d_km.log10()
}

/// Linear power gain `10^(-L/10)` of the Hata loss.
pub fn okumura_hata_gain(distance_m: f64, freq_hz: f64, h_bs_m: f64, h_ue_m: f64) -> f64 {
    10f64.powf(-okumura_hata_loss_db(distance_m, freq_hz, h_bs_m, h_ue_m) / 10.0)
}

/// Parameters of the random network used by system-level experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct LayoutParams {
    pub n_bs: usize,
    pub area_km2: f64,
    pub sync_size: usize,
    /// Group members besides the leader.
    pub n_members: usize,
    pub n_eves: usize,
    pub group_radius_m: f64,
    pub carrier_freq_hz: f64,
    pub h_bs_m: f64,
    pub h_ue_m: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            n_bs: 100,
            area_km2: 10.0,
            sync_size: 20,
            n_members: 9,
            n_eves: 2,
            group_radius_m: 500.0,
            carrier_freq_hz: 700e6,
            h_bs_m: 30.0,
            h_ue_m: 1.5,
        }
    }
}

pub type Point = [f64; 2];

/// BS field, synchronization area, and one user group with eavesdroppers.
///
/// `user_positions[0]` is the group leader.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkLayout {
    /// Side of the square region, meters.
    pub side_m: f64,
    pub bs_positions: Vec<Point>,
    pub sync_area: Vec<usize>,
    pub user_positions: Vec<Point>,
    pub eve_positions: Vec<Point>,
    pub carrier_freq_hz: f64,
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn nearest(points: &[Point], p: Point) -> usize {
    let mut best = 0;
    for (i, q) in points.iter().enumerate() {
        if dist(*q, p) < dist(points[best], p) {
            best = i;
        }
    }
    best
}

/// Draws a layout: uniform BSs (a Poisson field conditioned on its count),
/// the sync area as the BSs nearest the region center, a leader uniform over
/// the sync area's cells, and members/eavesdroppers uniform in a disc around
/// the leader (clipped to the region by rejection).
pub fn generate_system_scenario(params: &LayoutParams, rng: &mut SimRng) -> Result<NetworkLayout> {
    if !(params.area_km2 > 0.0) || params.n_bs == 0 || params.sync_size == 0 {
        return Err(Error::InvalidInput("layout needs positive area and BS counts".into()));
    }
    if params.sync_size > params.n_bs {
        return Err(Error::InvalidInput("sync area larger than BS count".into()));
    }
    let side = (params.area_km2 * 1e6).sqrt();
    let in_region = |p: Point| (0.0..=side).contains(&p[0]) && (0.0..=side).contains(&p[1]);
    let bs_positions: Vec<Point> =
        (0..params.n_bs).map(|_| [rng.uniform() * side, rng.uniform() * side]).collect();
    let center = [side / 2.0, side / 2.0];
    let mut order: Vec<usize> = (0..params.n_bs).collect();
    order.sort_by(|&a, &b| {
        dist(bs_positions[a], center)
            .total_cmp(&dist(bs_positions[b], center))
            .then(a.cmp(&b))
    });
    let mut sync_area: Vec<usize> = order[..params.sync_size].to_vec();
    sync_area.sort_unstable();

    let leader = loop {
        let p = [rng.uniform() * side, rng.uniform() * side];
        if sync_area.binary_search(&nearest(&bs_positions, p)).is_ok() {
            break p;
        }
    };
    let disc_point = |rng: &mut SimRng| loop {
        let r = params.group_radius_m * rng.uniform().sqrt();
        let phi = 2.0 * std::f64::consts::PI * rng.uniform();
        let p = [leader[0] + r * phi.cos(), leader[1] + r * phi.sin()];
        if in_region(p) {
            break p;
        }
    };
    let mut user_positions = vec![leader];
    for _ in 0..params.n_members {
        user_positions.push(disc_point(rng));
    }
    let eve_positions = (0..params.n_eves).map(|_| disc_point(rng)).collect();
    Ok(NetworkLayout {
        side_m: side,
        bs_positions,
        sync_area,
        user_positions,
        eve_positions,
        carrier_freq_hz: params.carrier_freq_hz,
    })
}

impl NetworkLayout {
    /// Hata gains `[bs][receiver]` towards the given receiver positions.
    pub fn gains_to(&self, receivers: &[Point], h_bs_m: f64, h_ue_m: f64) -> Vec<Vec<f64>> {
        self.bs_positions
            .iter()
            .map(|b| {
                receivers
                    .iter()
                    .map(|r| okumura_hata_gain(dist(*b, *r).max(1.0), self.carrier_freq_hz, h_bs_m, h_ue_m))
                    .collect()
            })
            .collect()
    }

    /// Line-oriented text: a `carrier_hz` header, then `kind index x y` per
    /// node with kinds `bs`, `sync`, `user`, `eve`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "side_m {}", self.side_m);
        let _ = writeln!(s, "carrier_hz {}", self.carrier_freq_hz);
        for (i, p) in self.bs_positions.iter().enumerate() {
            let _ = writeln!(s, "bs {i} {} {}", p[0], p[1]);
        }
        for &i in &self.sync_area {
            let p = self.bs_positions[i];
            let _ = writeln!(s, "sync {i} {} {}", p[0], p[1]);
        }
        for (i, p) in self.user_positions.iter().enumerate() {
            let _ = writeln!(s, "user {i} {} {}", p[0], p[1]);
        }
        for (i, p) in self.eve_positions.iter().enumerate() {
            let _ = writeln!(s, "eve {i} {} {}", p[0], p[1]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |n: usize, msg: &str| Error::InvalidInput(format!("layout line {}: {msg}", n + 1));
        let mut out = NetworkLayout {
            side_m: 0.0,
            bs_positions: Vec::new(),
            sync_area: Vec::new(),
            user_positions: Vec::new(),
            eve_positions: Vec::new(),
            carrier_freq_hz: 0.0,
        };
        for (n, line) in text.lines().enumerate() {
            let f: Vec<&str> = line.split_whitespace().collect();
            match f.as_slice() {
                [] => {}
                ["side_m", v] => out.side_m = v.parse().map_err(|_| bad(n, "bad number"))?,
                ["carrier_hz", v] => out.carrier_freq_hz = v.parse().map_err(|_| bad(n, "bad number"))?,
                [kind, i, x, y] => {
                    let i: usize = i.parse().map_err(|_| bad(n, "bad index"))?;
                    let p = [
                        x.parse().map_err(|_| bad(n, "bad coordinate"))?,
                        y.parse().map_err(|_| bad(n, "bad coordinate"))?,
                    ];
                    let list = match *kind {
                        "bs" => &mut out.bs_positions,
                        "user" => &mut out.user_positions,
                        "eve" => &mut out.eve_positions,
                        "sync" => {
                            out.sync_area.push(i);
                            continue;
                        }
                        _ => return Err(bad(n, "unknown kind")),
                    };
                    if i != list.len() {
                        return Err(bad(n, "indices must be consecutive"));
                    }
                    list.push(p);
                }
                _ => return Err(bad(n, "expected `kind index x y`")),
            }
        }
        Ok(out)
    }
}
