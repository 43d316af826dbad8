//! Closed-form block updates and the analytic Lagrangian gradients.
//!
//! Gradients use the conjugate Wirtinger convention
//! `d/dX* = (d/dRe X + i d/dIm X) / 2`.

use super::{DesignProblem, Multipliers};
use crate::error::Result;
use crate::mse::{effective_channel, eve_channels, user_channels, TransceiverSolution};
use crate::numerics::{
    c, fro2, hermitian_solve, identity, is_hermitian, null_space, zeros, ComplexMatrix, NullSpace,
    DEFAULT_NULL_TOL,
};

/// Scalar part of `A_t`: robust user terms, robust eavesdropper terms and the
/// power multiplier.
pub(crate) fn a_t_shift(
    problem: &DesignProblem,
    sol: &TransceiverSolution,
    lambda_e: &[f64],
    lambda_t: f64,
    t: usize,
) -> f64 {
    let dims = &problem.dims;
    let mut d = lambda_t;
    if problem.flags.chi_l {
        for l in 0..dims.n_users {
            d += problem.u.leg.get(t, l) * fro2(&sol.r[l]);
        }
    }
    if problem.flags.chi_e {
        for e in 0..dims.n_eves {
            d -= lambda_e[e] * problem.u.eve.get(t, e) * fro2(&sol.e[e]);
        }
    }
    d
}

/// `A_t`, the Hessian block of the Lagrangian with respect to `V_t` (and the
/// quadratic form governing `W_t`).
pub fn build_a_t(
    problem: &DesignProblem,
    sol: &TransceiverSolution,
    mult: &Multipliers,
    t: usize,
) -> ComplexMatrix {
    let dims = &problem.dims;
    let ch = &problem.channels;
    let n = dims.tx_antennas;
    let mut a = identity(n) * c(a_t_shift(problem, sol, &mult.lambda_e, mult.lambda_t[t], t), 0.0);
    for l in 0..dims.n_users {
        let rc = &sol.r[l] * &ch.c_hat[t][l];
        a += rc.adjoint() * &rc;
    }
    for e in 0..dims.n_eves {
        if mult.lambda_e[e] != 0.0 {
            let eg = &sol.e[e] * &ch.g_hat[t][e];
            a -= (eg.adjoint() * &eg) * c(mult.lambda_e[e], 0.0);
        }
    }
    debug_assert!(is_hermitian(&a, 1e-9));
    a
}

/// Right-hand side of the `V_t` stationarity condition with the other BSs'
/// precoders held fixed.
fn precoder_rhs(
    problem: &DesignProblem,
    sol: &TransceiverSolution,
    mult: &Multipliers,
    t: usize,
) -> ComplexMatrix {
    let dims = &problem.dims;
    let ch = &problem.channels;
    let ns = dims.streams;
    let mut b = zeros(dims.tx_antennas, ns);
    for l in 0..dims.n_users {
        let mut others = zeros(dims.rx_antennas, ns);
        for s in (0..dims.n_bs).filter(|&s| s != t) {
            others += &ch.c_hat[s][l] * &sol.v[s];
        }
        let resid = identity(ns) - &sol.r[l] * others;
        b += ch.c_hat[t][l].adjoint() * sol.r[l].adjoint() * resid;
    }
    for e in 0..dims.n_eves {
        if mult.lambda_e[e] == 0.0 {
            continue;
        }
        let mut others = zeros(dims.eve_antennas, ns);
        for s in (0..dims.n_bs).filter(|&s| s != t) {
            others += &ch.g_hat[s][e] * &sol.v[s];
        }
        let resid = identity(ns) - &sol.e[e] * others;
        b -= (ch.g_hat[t][e].adjoint() * sol.e[e].adjoint() * resid) * c(mult.lambda_e[e], 0.0);
    }
    b
}

/// Minimizer of the Lagrangian over `V_t` with every other block fixed.
pub fn update_precoder(
    problem: &DesignProblem,
    sol: &TransceiverSolution,
    mult: &Multipliers,
    t: usize,
) -> Result<ComplexMatrix> {
    let a = build_a_t(problem, sol, mult, t);
    hermitian_solve(&a, &precoder_rhs(problem, sol, mult, t))
}

/// Interference-plus-noise-plus-signal covariance seen by user `l`'s filter.
fn receiver_covariance(problem: &DesignProblem, sol: &TransceiverSolution, l: usize) -> (ComplexMatrix, ComplexMatrix) {
    let dims = &problem.dims;
    let links = user_channels(&problem.channels, l);
    let h = effective_channel(&links, &sol.v);
    let mut m = &h * h.adjoint() + identity(dims.rx_antennas) * c(dims.noise_var_user[l], 0.0);
    let mut robust = 0.0;
    for t in 0..dims.n_bs {
        let z = dims.an_var[t];
        if z != 0.0 {
            let cw = links[t] * &sol.w[t];
            m += (&cw * cw.adjoint()) * c(z, 0.0);
        }
        if problem.flags.chi_l {
            robust += problem.u.leg.get(t, l) * (fro2(&sol.v[t]) + z * fro2(&sol.w[t]));
        }
    }
    if robust != 0.0 {
        m += identity(dims.rx_antennas) * c(robust, 0.0);
    }
    (h, m)
}

/// Unconstrained MSE-minimizing receive filter of user `l`.
pub fn update_receiver(problem: &DesignProblem, sol: &TransceiverSolution, l: usize) -> Result<ComplexMatrix> {
    let (h, m) = receiver_covariance(problem, sol, l);
    Ok(hermitian_solve(&m, &h)?.adjoint())
}

/// Normalized projector onto the near-null space of `A_t`.
pub fn update_an_shaping(
    problem: &DesignProblem,
    sol: &TransceiverSolution,
    mult: &Multipliers,
    t: usize,
) -> ComplexMatrix {
    an_from_null_space(&null_space(&build_a_t(problem, sol, mult, t), DEFAULT_NULL_TOL))
}

pub(crate) fn an_from_null_space(ns: &NullSpace) -> ComplexMatrix {
    let norm = ns.projector.norm();
    &ns.projector / c(norm, 0.0)
}

/// Analytic `dL/dV_t*`.
pub fn grad_precoder(problem: &DesignProblem, sol: &TransceiverSolution, t: usize) -> ComplexMatrix {
    let dims = &problem.dims;
    let ch = &problem.channels;
    let ns = dims.streams;
    let mut g = &sol.v[t] * c(a_t_shift(problem, sol, &sol.lambda_e, sol.lambda_t[t], t), 0.0);
    for l in 0..dims.n_users {
        let h = effective_channel(&user_channels(ch, l), &sol.v);
        let resid = &sol.r[l] * h - identity(ns);
        g += ch.c_hat[t][l].adjoint() * sol.r[l].adjoint() * resid;
    }
    for e in 0..dims.n_eves {
        let h = effective_channel(&eve_channels(ch, e), &sol.v);
        let resid = &sol.e[e] * h - identity(ns);
        g -= (ch.g_hat[t][e].adjoint() * sol.e[e].adjoint() * resid) * c(sol.lambda_e[e], 0.0);
    }
    g
}

/// Analytic `dL/dR_l*`.
pub fn grad_receiver(problem: &DesignProblem, sol: &TransceiverSolution, l: usize) -> ComplexMatrix {
    let (h, m) = receiver_covariance(problem, sol, l);
    &sol.r[l] * m - h.adjoint()
}

/// Analytic `dL/dW_t*`.
pub fn grad_an(problem: &DesignProblem, sol: &TransceiverSolution, t: usize) -> ComplexMatrix {
    let mult = Multipliers { lambda_e: sol.lambda_e.clone(), lambda_t: sol.lambda_t.clone() };
    (build_a_t(problem, sol, &mult, t) * &sol.w[t]) * c(problem.dims.an_var[t], 0.0)
}

/// First-order sensitivity `G = d eps_l / d Delta_tl*` at `Delta = 0`; the
/// linearized change is `2 Re tr(G^H Delta)`.
pub fn legit_error_sensitivity(problem: &DesignProblem, sol: &TransceiverSolution, t: usize, l: usize) -> ComplexMatrix {
    let ch = &problem.channels;
    let ns = problem.dims.streams;
    let r = &sol.r[l];
    let h = effective_channel(&user_channels(ch, l), &sol.v);
    let mut g = r.adjoint() * (r * h - identity(ns)) * sol.v[t].adjoint();
    let z = problem.dims.an_var[t];
    if z != 0.0 {
        g += (r.adjoint() * r * &ch.c_hat[t][l] * &sol.w[t] * sol.w[t].adjoint()) * c(z, 0.0);
    }
    g
}

/// First-order sensitivity `d eps_e / d Delta_te*` at `Delta = 0`.
pub fn eve_error_sensitivity(problem: &DesignProblem, sol: &TransceiverSolution, t: usize, e: usize) -> ComplexMatrix {
    let ch = &problem.channels;
    let ns = problem.dims.streams;
    let f = &sol.e[e];
    let h = effective_channel(&eve_channels(ch, e), &sol.v);
    let mut g = f.adjoint() * (f * h - identity(ns)) * sol.v[t].adjoint();
    let z = problem.dims.an_var[t];
    if z != 0.0 {
        g += (f.adjoint() * f * &ch.g_hat[t][e] * &sol.w[t] * sol.w[t].adjoint()) * c(z, 0.0);
    }
    g
}

/// Fills `sol.e` with the AN-unaware MMSE filters for the problem's
/// eavesdropper channels.
pub fn refresh_eve_filters(problem: &DesignProblem, sol: &mut TransceiverSolution) -> Result<()> {
    for e in 0..problem.dims.n_eves {
        sol.e[e] = crate::mse::eve_mmse_filter(
            &sol.v,
            &eve_channels(&problem.channels, e),
            problem.dims.noise_var_eve[e],
        )?;
    }
    Ok(())
}
