//! Transmit power and closed-form MSE evaluators.
//!
//! All BSs send the same stream vector `d`, so the useful signal at a receiver
//! combines coherently: `H_l = sum_t C_tl V_t`. The evaluators are exact
//! expectations over data, artificial noise, receiver noise and (when the
//! robust flag is set) zero-mean CSI errors whose per-entry variance is the
//! link's uncertainty scalar.

use crate::channel::{ChannelSet, LinkTable, SystemDims};
use crate::error::{Error, Result};
use crate::numerics::{c, fro2, hermitian_solve, identity, trace_re, zeros, ComplexMatrix, SimRng};

/// Precoders, AN shapers, receive filters and Lagrange multipliers.
#[derive(Clone, Debug, PartialEq)]
pub struct TransceiverSolution {
    /// Per BS, `tx_antennas x streams`.
    pub v: Vec<ComplexMatrix>,
    /// Per BS, `tx_antennas x tx_antennas`.
    pub w: Vec<ComplexMatrix>,
    /// Per user, `streams x rx_antennas`.
    pub r: Vec<ComplexMatrix>,
    /// Per eavesdropper, `streams x eve_antennas`.
    pub e: Vec<ComplexMatrix>,
    pub lambda_e: Vec<f64>,
    pub lambda_t: Vec<f64>,
}

impl TransceiverSolution {
    /// All-zero solution of the right shapes.
    pub fn zeros(dims: &SystemDims) -> Self {
        Self {
            v: vec![zeros(dims.tx_antennas, dims.streams); dims.n_bs],
            w: vec![zeros(dims.tx_antennas, dims.tx_antennas); dims.n_bs],
            r: vec![zeros(dims.streams, dims.rx_antennas); dims.n_users],
            e: vec![zeros(dims.streams, dims.eve_antennas); dims.n_eves],
            lambda_e: vec![0.0; dims.n_eves],
            lambda_t: vec![0.0; dims.n_bs],
        }
    }

    pub fn check(&self, dims: &SystemDims) -> Result<()> {
        let ok = self.v.len() == dims.n_bs
            && self.w.len() == dims.n_bs
            && self.r.len() == dims.n_users
            && self.e.len() == dims.n_eves
            && self.lambda_e.len() == dims.n_eves
            && self.lambda_t.len() == dims.n_bs
            && self.v.iter().all(|m| m.shape() == (dims.tx_antennas, dims.streams))
            && self.w.iter().all(|m| m.shape() == (dims.tx_antennas, dims.tx_antennas))
            && self.r.iter().all(|m| m.shape() == (dims.streams, dims.rx_antennas))
            && self.e.iter().all(|m| m.shape() == (dims.streams, dims.eve_antennas));
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("transceiver solution does not match dimensions".into()))
        }
    }
}

/// Whether each side's MSE includes the CSI-uncertainty terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RobustFlags {
    pub chi_l: bool,
    pub chi_e: bool,
}

impl RobustFlags {
    pub const NON_ROBUST: RobustFlags = RobustFlags { chi_l: false, chi_e: false };
    pub const ROBUST: RobustFlags = RobustFlags { chi_l: true, chi_e: true };
}

/// Uncertainty scalar per link: an error variance, or the squared norm of a
/// fixed error realization.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyInput {
    pub leg: LinkTable,
    pub eve: LinkTable,
}

impl UncertaintyInput {
    pub fn zeros(dims: &SystemDims) -> Self {
        Self {
            leg: LinkTable::uniform(dims.n_bs, dims.n_users, 0.0),
            eve: LinkTable::uniform(dims.n_bs, dims.n_eves, 0.0),
        }
    }

    /// Scalars taken from the channel set's error models.
    pub fn from_channels(channels: &ChannelSet, dims: &SystemDims) -> Self {
        Self {
            leg: LinkTable::from_fn(dims.n_bs, dims.n_users, |t, l| channels.leg_error.scalar(t, l)),
            eve: LinkTable::from_fn(dims.n_bs, dims.n_eves, |t, e| channels.eve_error.scalar(t, e)),
        }
    }
}

/// `tr(V V^H) + an_var * tr(W W^H)`.
pub fn transmit_power(v: &ComplexMatrix, w: &ComplexMatrix, an_var: f64) -> f64 {
    fro2(v) + an_var * fro2(w)
}

/// `sum_t H_t V_t` for per-BS channels towards one receiver.
pub fn effective_channel(channels: &[&ComplexMatrix], v: &[ComplexMatrix]) -> ComplexMatrix {
    let mut h = zeros(channels[0].nrows(), v[0].ncols());
    for (ch, vt) in channels.iter().zip(v) {
        h += *ch * vt;
    }
    h
}

pub(crate) fn user_channels(channels: &ChannelSet, l: usize) -> Vec<&ComplexMatrix> {
    channels.c_hat.iter().map(|row| &row[l]).collect()
}

pub(crate) fn eve_channels(channels: &ChannelSet, e: usize) -> Vec<&ComplexMatrix> {
    channels.g_hat.iter().map(|row| &row[e]).collect()
}

/// Shared closed form for one receiver with filter `f`.
#[allow(clippy::too_many_arguments)]
fn receiver_mse(
    f: &ComplexMatrix,
    links: &[&ComplexMatrix],
    sol: &TransceiverSolution,
    an_var: &[f64],
    noise_var: f64,
    robust: bool,
    s: impl Fn(usize) -> f64,
    streams: usize,
) -> f64 {
    let h = effective_channel(links, &sol.v);
    let fh = f * &h;
    let f2 = fro2(f);
    let mut eps = streams as f64 - 2.0 * trace_re(&fh) + fro2(&fh) + noise_var * f2;
    for (t, link) in links.iter().enumerate() {
        if an_var[t] != 0.0 {
            eps += an_var[t] * fro2(&(f * (*link * &sol.w[t])));
        }
    }
    if robust {
        let mut acc = 0.0;
        for t in 0..links.len() {
            acc += s(t) * (fro2(&sol.v[t]) + an_var[t] * fro2(&sol.w[t]));
        }
        eps += f2 * acc;
    }
    eps
}

/// Closed-form MSE of legitimate user `l`.
pub fn mse_legitimate(
    sol: &TransceiverSolution,
    channels: &ChannelSet,
    dims: &SystemDims,
    flags: RobustFlags,
    u: &UncertaintyInput,
    l: usize,
) -> Result<f64> {
    if l >= dims.n_users {
        return Err(Error::ShapeMismatch(format!("user index {l} out of range")));
    }
    sol.check(dims)?;
    channels.check(dims)?;
    Ok(receiver_mse(
        &sol.r[l],
        &user_channels(channels, l),
        sol,
        &dims.an_var,
        dims.noise_var_user[l],
        flags.chi_l,
        |t| u.leg.get(t, l),
        dims.streams,
    ))
}

/// Closed-form MSE of eavesdropper `e` under its filter in `sol.e`.
pub fn mse_eavesdropper(
    sol: &TransceiverSolution,
    channels: &ChannelSet,
    dims: &SystemDims,
    flags: RobustFlags,
    u: &UncertaintyInput,
    e: usize,
) -> Result<f64> {
    if e >= dims.n_eves {
        return Err(Error::ShapeMismatch(format!("eavesdropper index {e} out of range")));
    }
    sol.check(dims)?;
    channels.check(dims)?;
    Ok(receiver_mse(
        &sol.e[e],
        &eve_channels(channels, e),
        sol,
        &dims.an_var,
        dims.noise_var_eve[e],
        flags.chi_e,
        |t| u.eve.get(t, e),
        dims.streams,
    ))
}

/// Sum of legitimate MSEs.
pub fn sum_mse(
    sol: &TransceiverSolution,
    channels: &ChannelSet,
    dims: &SystemDims,
    flags: RobustFlags,
    u: &UncertaintyInput,
) -> Result<f64> {
    (0..dims.n_users).map(|l| mse_legitimate(sol, channels, dims, flags, u, l)).sum()
}

/// Lagrangian `sum_l eps_l - sum_e lambda_e (eps_e - Gamma) + sum_t lambda_t (P_t - P_T)`
/// at the multipliers stored in `sol`.
pub fn lagrangian(
    sol: &TransceiverSolution,
    channels: &ChannelSet,
    dims: &SystemDims,
    flags: RobustFlags,
    u: &UncertaintyInput,
) -> Result<f64> {
    let mut val = sum_mse(sol, channels, dims, flags, u)?;
    for e in 0..dims.n_eves {
        val -= sol.lambda_e[e]
            * (mse_eavesdropper(sol, channels, dims, flags, u, e)? - dims.eve_mse_floor);
    }
    for t in 0..dims.n_bs {
        val += sol.lambda_t[t]
            * (transmit_power(&sol.v[t], &sol.w[t], dims.an_var[t]) - dims.max_power);
    }
    Ok(val)
}

/// Linear MMSE filter of a receiver that ignores artificial noise:
/// `H^H (H H^H + noise_var I)^{-1}` with `H = sum_t G_t V_t`.
pub fn eve_mmse_filter(
    v: &[ComplexMatrix],
    g: &[&ComplexMatrix],
    noise_var: f64,
) -> Result<ComplexMatrix> {
    if v.len() != g.len() || v.is_empty() {
        return Err(Error::ShapeMismatch("one channel per precoder required".into()));
    }
    let h = effective_channel(g, v);
    let gram = &h * h.adjoint() + identity(h.nrows()) * c(noise_var, 0.0);
    Ok(hermitian_solve(&gram, &h)?.adjoint())
}

/// Monte-Carlo and analytic sides of `E[tr(X U X^H Vm)] = sigma^2 tr(U) tr(Vm)`
/// for `X` with i.i.d. `CN(0, sigma^2)` entries.
#[derive(Clone, Copy, Debug)]
pub struct TraceCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
}

pub fn trace_property_oracle(
    u: &ComplexMatrix,
    vm: &ComplexMatrix,
    sigma: f64,
    trials: usize,
    rng: &mut SimRng,
) -> TraceCheck {
    let rhs = sigma * sigma * u.trace().re * vm.trace().re;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..trials {
        let x = rng.complex_gaussian(vm.nrows(), u.nrows(), sigma * sigma);
        let val = trace_re(&(&x * u * x.adjoint() * vm));
        sum += val;
        sum2 += val * val;
    }
    let n = trials.max(1) as f64;
    let lhs = sum / n;
    let var = (sum2 / n - lhs * lhs).max(0.0);
    TraceCheck { lhs, rhs, stderr: (var / n).sqrt() }
}
