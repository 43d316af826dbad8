//! Transceiver design by alternating closed-form updates.
//!
//! [`coordinate_descent`] handles perfect and stochastic CSI; [`nbe_design`]
//! wraps it for norm-bounded errors by alternating with worst-case error
//! updates.

mod format;
mod multipliers;
mod robust;
mod updates;

pub use format::{solution_from_text, solution_to_text};
pub use multipliers::{
    joint_precoders, solve_multipliers, MultiplierSolution, MAX_MULTIPLIER_ITERS, MULTIPLIER_TOL,
};
pub use robust::{nbe_design, worst_case_delta_eve, worst_case_delta_legitimate, WorstCaseErrors};
pub use updates::{
    build_a_t, eve_error_sensitivity, grad_an, grad_precoder, grad_receiver, legit_error_sensitivity,
    refresh_eve_filters, update_an_shaping, update_precoder, update_receiver,
};

use crate::channel::{ChannelSet, SystemDims};
use crate::error::{Error, Result};
use crate::mse::{
    effective_channel, eve_channels, mse_eavesdropper, mse_legitimate, transmit_power, RobustFlags,
    TransceiverSolution, UncertaintyInput,
};
use crate::numerics::{c, fro2, trace_re, SimRng};

/// Everything a design run needs.
#[derive(Clone, Debug)]
pub struct DesignProblem {
    pub dims: SystemDims,
    pub channels: ChannelSet,
    pub flags: RobustFlags,
    pub u: UncertaintyInput,
    /// Stop when every user's MSE moves by at most this much.
    pub beta: f64,
    pub max_outer_iters: usize,
    /// Outer iterations of the norm-bounded wrapper.
    pub max_nbe_iters: usize,
}

impl DesignProblem {
    pub fn new(dims: SystemDims, channels: ChannelSet, flags: RobustFlags, u: UncertaintyInput) -> Self {
        Self { dims, channels, flags, u, beta: 1e-4, max_outer_iters: 50, max_nbe_iters: 30 }
    }

    /// Non-robust problem on the estimated channels.
    pub fn non_robust(dims: SystemDims, channels: ChannelSet) -> Self {
        let u = UncertaintyInput::zeros(&dims);
        Self::new(dims, channels, RobustFlags::NON_ROBUST, u)
    }

    /// Robust problem using the channel set's error-model scalars.
    pub fn robust(dims: SystemDims, channels: ChannelSet) -> Self {
        let u = UncertaintyInput::from_channels(&channels, &dims);
        Self::new(dims, channels, RobustFlags::ROBUST, u)
    }

    pub fn check(&self) -> Result<()> {
        let issues = self.dims.issues();
        if let Some(first) = issues.first() {
            return Err(Error::InvalidInput(first.clone()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidInput("beta must be positive".into()));
        }
        self.channels.check(&self.dims)
    }
}

/// Lagrange multipliers of the eavesdropper-MSE and power constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct Multipliers {
    pub lambda_e: Vec<f64>,
    pub lambda_t: Vec<f64>,
}

impl Multipliers {
    pub fn zeros(dims: &SystemDims) -> Self {
        Self { lambda_e: vec![0.0; dims.n_eves], lambda_t: vec![0.0; dims.n_bs] }
    }

    pub fn of(sol: &TransceiverSolution) -> Self {
        Self { lambda_e: sol.lambda_e.clone(), lambda_t: sol.lambda_t.clone() }
    }
}

/// Diagnostics of a design run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub iterations_used: usize,
    pub final_smse: f64,
    /// Eavesdropper constraints first (`min(lambda_e, eps_e - Gamma)`), then
    /// relative power constraints (`min(lambda_t P_T, (P_T - P_t) / P_T)`).
    pub constraint_residuals: Vec<f64>,
    pub converged: bool,
    pub multiplier_solve_residual: f64,
    /// Multiplier solves that stopped above tolerance.
    pub multiplier_failures: usize,
    pub smse_history: Vec<f64>,
    /// Largest increase of the SMSE between consecutive iterations.
    pub max_smse_increase: f64,
}

/// Random starting point: Gaussian precoders at 90% of the budget and a
/// unit-trace Gaussian AN shaper.
pub fn initial_solution(dims: &SystemDims, rng: &mut SimRng) -> TransceiverSolution {
    let mut sol = TransceiverSolution::zeros(dims);
    for t in 0..dims.n_bs {
        let v = rng.complex_gaussian(dims.tx_antennas, dims.streams, 1.0);
        let target = (0.9 * dims.max_power).min(dims.max_power - dims.an_var[t]).max(0.0);
        sol.v[t] = &v * c((target / crate::numerics::fro2(&v)).sqrt(), 0.0);
        let w = rng.complex_gaussian(dims.tx_antennas, dims.tx_antennas, 1.0);
        sol.w[t] = &w / c(w.norm(), 0.0);
    }
    sol
}

fn constraint_residuals(problem: &DesignProblem, sol: &TransceiverSolution) -> Result<Vec<f64>> {
    let dims = &problem.dims;
    let mut out = Vec::with_capacity(dims.n_eves + dims.n_bs);
    for e in 0..dims.n_eves {
        let eps = mse_eavesdropper(sol, &problem.channels, dims, problem.flags, &problem.u, e)?;
        out.push(sol.lambda_e[e].min(eps - dims.eve_mse_floor));
    }
    for t in 0..dims.n_bs {
        let p = transmit_power(&sol.v[t], &sol.w[t], dims.an_var[t]);
        out.push((sol.lambda_t[t] * dims.max_power).min((dims.max_power - p) / dims.max_power));
    }
    Ok(out)
}

fn user_mses(problem: &DesignProblem, sol: &TransceiverSolution) -> Result<Vec<f64>> {
    (0..problem.dims.n_users)
        .map(|l| mse_legitimate(sol, &problem.channels, &problem.dims, problem.flags, &problem.u, l))
        .collect()
}

/// Scales all precoders by a common `alpha >= 1`, as far as the per-BS power
/// budgets allow, while no eavesdropper MSE at the current filters drops below
/// `min(Gamma, its current value)`.
///
/// With the receive filters divided by the same `alpha`, every user's
/// filter-times-channel product is unchanged and the noise and AN terms
/// shrink, so no user's MSE increases before the next receiver update. This
/// keeps the iterates from creeping up to full power over many iterations
/// when the power constraints are slack at the current filters.
fn scale_to_budget(problem: &DesignProblem, sol: &mut TransceiverSolution) {
    let dims = &problem.dims;
    let mut alpha2 = f64::INFINITY;
    for t in 0..dims.n_bs {
        let pv = fro2(&sol.v[t]);
        if pv > 0.0 {
            let room = dims.max_power - dims.an_var[t] * fro2(&sol.w[t]);
            alpha2 = alpha2.min(room / pv);
        }
    }
    if !(alpha2.is_finite() && alpha2 > 1.0) {
        return;
    }
    let mut alpha = alpha2.sqrt();
    for e in 0..dims.n_eves {
        // eps_e(a) = k0 + k1 a + k2 a^2 at the current eavesdropper filter.
        let f = &sol.e[e];
        let h = effective_channel(&eve_channels(&problem.channels, e), &sol.v);
        let fh = f * &h;
        let mut k2 = fro2(&fh);
        if problem.flags.chi_e {
            k2 += fro2(f) * (0..dims.n_bs).map(|t| problem.u.eve.get(t, e) * fro2(&sol.v[t])).sum::<f64>();
        }
        let k1 = -2.0 * trace_re(&fh);
        let eps1 = match mse_eavesdropper(sol, &problem.channels, dims, problem.flags, &problem.u, e) {
            Ok(v) => v,
            Err(_) => return,
        };
        let k0 = eps1 - k1 - k2;
        let target = dims.eve_mse_floor.min(eps1);
        // q(a) = k2 a^2 + k1 a + (k0 - target) with q(1) >= 0; the first root
        // above 1 caps alpha.
        let disc = k1 * k1 - 4.0 * k2 * (k0 - target);
        if k2 > 0.0 && disc > 0.0 {
            let lo = (-k1 - disc.sqrt()) / (2.0 * k2);
            let hi = (-k1 + disc.sqrt()) / (2.0 * k2);
            if hi > 1.0 && lo >= 1.0 - 1e-12 {
                alpha = alpha.min(lo.max(1.0));
            }
        }
    }
    if alpha > 1.0 {
        for t in 0..dims.n_bs {
            sol.v[t] *= c(alpha, 0.0);
        }
        for l in 0..dims.n_users {
            sol.r[l] /= c(alpha, 0.0);
        }
    }
}

/// Alternating design from a random start drawn from `rng`.
pub fn coordinate_descent(problem: &DesignProblem, rng: &mut SimRng) -> Result<(TransceiverSolution, SolverReport)> {
    let init = initial_solution(&problem.dims, rng);
    coordinate_descent_from(problem, init)
}

/// Alternating design: eavesdropper filters, receive filters, multipliers,
/// then precoders and AN shapers, until every user's MSE settles.
///
/// Running out of iterations is not an error; it is reported through
/// `SolverReport::converged`.
pub fn coordinate_descent_from(
    problem: &DesignProblem,
    init: TransceiverSolution,
) -> Result<(TransceiverSolution, SolverReport)> {
    problem.check()?;
    init.check(&problem.dims)?;
    let dims = &problem.dims;
    let mut sol = init;
    let mut prev = vec![0.0; dims.n_users];
    let mut history = Vec::new();
    let mut failures = 0;
    let mut mult_resid = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..problem.max_outer_iters {
        iterations += 1;
        refresh_eve_filters(problem, &mut sol)?;
        for l in 0..dims.n_users {
            sol.r[l] = update_receiver(problem, &sol, l)?;
        }
        let (m, ev) = multipliers::solve_and_evaluate(problem, &sol)?;
        if !m.converged {
            failures += 1;
        }
        mult_resid = m.residual;
        sol.lambda_e = m.lambda_e;
        sol.lambda_t = m.lambda_t;
        sol.v = ev.v;
        sol.w = ev.w;
        scale_to_budget(problem, &mut sol);
        let eps = user_mses(problem, &sol)?;
        history.push(eps.iter().sum());
        let settled = eps.iter().zip(&prev).all(|(a, b)| (a - b).abs() <= problem.beta);
        prev = eps;
        if settled {
            converged = true;
            break;
        }
    }
    let max_smse_increase = history.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let report = SolverReport {
        iterations_used: iterations,
        final_smse: *history.last().unwrap_or(&f64::NAN),
        constraint_residuals: constraint_residuals(problem, &sol)?,
        converged,
        multiplier_solve_residual: mult_resid,
        multiplier_failures: failures,
        smse_history: history,
        max_smse_increase,
    };
    Ok((sol, report))
}
