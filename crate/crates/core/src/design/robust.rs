//! Worst-case CSI errors and the norm-bounded design loop.

use super::updates::{eve_error_sensitivity, legit_error_sensitivity};
use super::{coordinate_descent_from, initial_solution, DesignProblem, SolverReport};
use crate::channel::{draw_error, ChannelSet, ErrorModel, LinkError, LinkTable};
use crate::error::{Error, Result};
use crate::mse::{RobustFlags, TransceiverSolution, UncertaintyInput};
use crate::numerics::{c, ComplexMatrix, SimRng};

/// One error matrix per link, on or inside its uncertainty ball.
#[derive(Clone, Debug, PartialEq)]
pub struct WorstCaseErrors {
    /// `delta_tl[t][l]`.
    pub delta_tl: Vec<Vec<ComplexMatrix>>,
    /// `delta_te[t][e]`.
    pub delta_te: Vec<Vec<ComplexMatrix>>,
}

fn on_sphere(g: ComplexMatrix, tau: f64, sign: f64) -> ComplexMatrix {
    let n = g.norm();
    if n == 0.0 || tau <= 0.0 {
        return ComplexMatrix::zeros(g.nrows(), g.ncols());
    }
    g * c(sign * tau.sqrt() / n, 0.0)
}

/// Error on the ball of squared radius `tau` that maximizes the first-order
/// MSE of user `l` around the estimate `C_tl`.
pub fn worst_case_delta_legitimate(
    problem: &DesignProblem,
    sol: &TransceiverSolution,
    t: usize,
    l: usize,
    tau: f64,
) -> ComplexMatrix {
    on_sphere(legit_error_sensitivity(problem, sol, t, l), tau, 1.0)
}

/// Error on the ball of squared radius `tau` that minimizes the first-order
/// MSE of eavesdropper `e` around the estimate `G_te`.
pub fn worst_case_delta_eve(
    problem: &DesignProblem,
    sol: &TransceiverSolution,
    t: usize,
    e: usize,
    tau: f64,
) -> ComplexMatrix {
    on_sphere(eve_error_sensitivity(problem, sol, t, e), tau, -1.0)
}

fn radii(model: &ErrorModel, n_bs: usize, n_rx: usize) -> Result<LinkTable> {
    match model {
        ErrorModel::Stochastic(_) => {
            Err(Error::InvalidInput("norm-bounded design needs norm-bounded or perfect error models".into()))
        }
        _ => Ok(LinkTable::from_fn(n_bs, n_rx, |t, r| model.scalar(t, r))),
    }
}

/// Problem on the shifted channels `C + Delta`, `G + Delta` with the squared
/// ball radii as uncertainty scalars.
fn shifted_problem(problem: &DesignProblem, d: &WorstCaseErrors, tau_l: &LinkTable, tau_e: &LinkTable) -> DesignProblem {
    let ch = &problem.channels;
    let shift = |base: &Vec<Vec<ComplexMatrix>>, delta: &Vec<Vec<ComplexMatrix>>| {
        base.iter()
            .zip(delta)
            .map(|(row, drow)| row.iter().zip(drow).map(|(a, b)| a + b).collect())
            .collect()
    };
    let channels = ChannelSet {
        c_hat: shift(&ch.c_hat, &d.delta_tl),
        g_hat: shift(&ch.g_hat, &d.delta_te),
        leg_error: ch.leg_error.clone(),
        eve_error: ch.eve_error.clone(),
    };
    let u = UncertaintyInput { leg: tau_l.clone(), eve: tau_e.clone() };
    DesignProblem { channels, flags: RobustFlags::ROBUST, u, ..problem.clone() }
}

/// Norm-bounded design: alternate a robust design on the currently assumed
/// errors with a first-order worst-case error update, until every user's MSE
/// settles.
///
/// The assumed errors are the running average of the worst-case responses,
/// and the uncertainty scalars are the squared ball radii. The first inner
/// design starts from the same random point [`super::coordinate_descent`]
/// would draw from `rng`, later ones from the previous solution; initial
/// errors come from substream 1. With all radii zero a single inner design is
/// returned, equal to the plain design. The returned errors are the ones the
/// returned transceivers were designed against.
pub fn nbe_design(
    problem: &DesignProblem,
    rng: &mut SimRng,
) -> Result<(TransceiverSolution, WorstCaseErrors, SolverReport)> {
    problem.check()?;
    let dims = &problem.dims;
    let tau_l = radii(&problem.channels.leg_error, dims.n_bs, dims.n_users)?;
    let tau_e = radii(&problem.channels.eve_error, dims.n_bs, dims.n_eves)?;
    let zero_radii = tau_l.values().iter().chain(tau_e.values()).all(|v| *v == 0.0);
    let mut delta_rng = rng.substream(1);
    let mut start = initial_solution(dims, rng);
    let ch = &problem.channels;
    let mut delta = WorstCaseErrors {
        delta_tl: (0..dims.n_bs)
            .map(|t| {
                (0..dims.n_users)
                    .map(|l| {
                        let m = &ch.c_hat[t][l];
                        draw_error(LinkError::NormBounded(tau_l.get(t, l)), m.nrows(), m.ncols(), &mut delta_rng)
                    })
                    .collect()
            })
            .collect(),
        delta_te: (0..dims.n_bs)
            .map(|t| {
                (0..dims.n_eves)
                    .map(|e| {
                        let m = &ch.g_hat[t][e];
                        draw_error(LinkError::NormBounded(tau_e.get(t, e)), m.nrows(), m.ncols(), &mut delta_rng)
                    })
                    .collect()
            })
            .collect(),
    };

    let mut prev: Option<Vec<f64>> = None;
    let mut history = Vec::new();
    let mut failures = 0;
    let mut last = None;
    let mut converged = false;
    for _ in 0..problem.max_nbe_iters {
        let inner = shifted_problem(problem, &delta, &tau_l, &tau_e);
        let (sol, rep) = coordinate_descent_from(&inner, start.clone())?;
        start = sol.clone();
        failures += rep.multiplier_failures;
        let eps = super::user_mses(&inner, &sol)?;
        history.push(eps.iter().sum::<f64>());
        let next = WorstCaseErrors {
            delta_tl: (0..dims.n_bs)
                .map(|t| {
                    (0..dims.n_users)
                        .map(|l| worst_case_delta_legitimate(problem, &sol, t, l, tau_l.get(t, l)))
                        .collect()
                })
                .collect(),
            delta_te: (0..dims.n_bs)
                .map(|t| {
                    (0..dims.n_eves)
                        .map(|e| worst_case_delta_eve(problem, &sol, t, e, tau_e.get(t, e)))
                        .collect()
                })
                .collect(),
        };
        let settled = prev
            .as_ref()
            .is_some_and(|p| p.iter().zip(&eps).all(|(a, b)| (a - b).abs() <= problem.beta));
        prev = Some(eps);
        last = Some((sol, delta.clone(), rep));
        if settled || zero_radii {
            converged = true;
            break;
        }
        // Running average of the worst-case responses: the plain response
        // alternates between nearly opposite errors from one pass to the next.
        let w = 1.0 / (history.len() as f64 + 1.0);
        let blend = |old: &[Vec<ComplexMatrix>], new: &[Vec<ComplexMatrix>]| -> Vec<Vec<ComplexMatrix>> {
            old.iter()
                .zip(new)
                .map(|(ro, rn)| ro.iter().zip(rn).map(|(a, b)| a * c(1.0 - w, 0.0) + b * c(w, 0.0)).collect())
                .collect()
        };
        delta = WorstCaseErrors {
            delta_tl: blend(&delta.delta_tl, &next.delta_tl),
            delta_te: blend(&delta.delta_te, &next.delta_te),
        };
    }
    let (sol, used, rep) = last.ok_or(Error::InvalidInput("max_nbe_iters must be at least 1".into()))?;
    let max_smse_increase = history.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let report = SolverReport {
        iterations_used: history.len(),
        final_smse: *history.last().unwrap_or(&f64::NAN),
        constraint_residuals: rep.constraint_residuals,
        converged,
        multiplier_solve_residual: rep.multiplier_solve_residual,
        multiplier_failures: failures,
        smse_history: history,
        max_smse_increase,
    };
    Ok((sol, used, report))
}
