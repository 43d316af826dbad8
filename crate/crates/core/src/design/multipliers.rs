//! Joint precoder solve and the Lagrange-multiplier root finder.
//!
//! For fixed receive and eavesdropper filters the precoder stationarity
//! conditions of all BSs form one linear system
//! `(D + U J U^H) V = U J C0`, where `U` stacks the per-BS matrices
//! `[C_tl^H R_l^H ..., G_te^H E_e^H ...]`, `J = diag(I, -lambda_e I)` and `D`
//! is block-diagonal with scalar blocks. When every block of `D` is positive
//! the solve reduces to an `r x r` system with `r = (K_R + K_E) N_s`.
//!
//! With the AN shaper restricted to unit Frobenius norm, the null-space shaper
//! minimizes the Lagrangian over `W_t`, so the dual function
//! `g(lambda) = min_{V, W} L` is concave in the multipliers and its gradient is
//! the constraint-value vector. The multipliers are found by projected Newton
//! ascent on `g` over `lambda >= 0`; complementary slackness falls out of the
//! bound handling.

use std::cell::RefCell;
use std::rc::Rc;

use nalgebra::DMatrix;

use super::updates::a_t_shift;
use super::{DesignProblem, Multipliers};
use crate::error::{Error, Result};
use crate::mse::TransceiverSolution;
use crate::numerics::{
    c, fro2, identity, null_space_indices, pd_cholesky, projector_onto, trace_re, zeros,
    ComplexMatrix, DEFAULT_NULL_TOL,
};

/// Target max-norm of the constraint residual.
pub const MULTIPLIER_TOL: f64 = 1e-5;
/// Jacobian evaluations allowed per solve.
pub const MAX_MULTIPLIER_ITERS: usize = 200;
/// Lower bound of a power multiplier relative to the typical size of `A_t`.
const POWER_MULTIPLIER_FLOOR: f64 = 1e-9;
/// Required gap of the reduced system's eigenvalues from the definiteness
/// boundary.
const PD_MARGIN: f64 = 1e-10;
const STALL_LIMIT: usize = 8;

/// Result of a multiplier solve.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierSolution {
    pub lambda_e: Vec<f64>,
    pub lambda_t: Vec<f64>,
    /// Max-norm of the complementarity residual at the returned multipliers.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl MultiplierSolution {
    pub fn multipliers(&self) -> Multipliers {
        Multipliers { lambda_e: self.lambda_e.clone(), lambda_t: self.lambda_t.clone() }
    }
}

/// Precoders, AN shapers and constraint values at one multiplier point.
#[derive(Clone, Debug)]
pub(crate) struct Evaluation {
    pub v: Vec<ComplexMatrix>,
    pub w: Vec<ComplexMatrix>,
    pub power: Vec<f64>,
    pub eps_e: Vec<f64>,
    pub smse: f64,
}

/// Quantities that depend on the receive filters only.
pub(crate) struct PrecoderSystem<'a> {
    problem: &'a DesignProblem,
    sol: &'a TransceiverSolution,
    /// Per BS, `N_T x r`.
    u: Vec<ComplexMatrix>,
    /// Per BS, `U_t^H U_t`.
    gram: Vec<ComplexMatrix>,
    /// Per BS, `sum_l (R_l C_tl)^H (R_l C_tl)`.
    user_quad: Vec<ComplexMatrix>,
    /// `[t][e]`, `E_e G_te`.
    eg: Vec<Vec<ComplexMatrix>>,
    /// `[t][l]`, `R_l C_tl`.
    rc: Vec<Vec<ComplexMatrix>>,
    r_users: usize,
}

/// Eigen-decompositions of `A_t - d_t I` for one eavesdropper multiplier vector.
pub(crate) struct EveState {
    lambda_e: Vec<f64>,
    eig: Vec<(Vec<f64>, ComplexMatrix)>,
    /// Per BS, AN shapers already built, keyed by the retained eigenvectors.
    an_cache: Vec<RefCell<Vec<(Vec<usize>, Rc<AnShaper>)>>>,
}

/// AN shaper of one BS with its leakage `||F H_t W_t||^2` into every
/// receiver filter.
struct AnShaper {
    w: ComplexMatrix,
    w2: f64,
    user: Vec<f64>,
    eve: Vec<f64>,
}

impl<'a> PrecoderSystem<'a> {
    pub fn new(problem: &'a DesignProblem, sol: &'a TransceiverSolution) -> Self {
        let dims = &problem.dims;
        let ch = &problem.channels;
        let ns = dims.streams;
        let r_users = dims.n_users * ns;
        let r = r_users + dims.n_eves * ns;
        let mut u = Vec::with_capacity(dims.n_bs);
        let mut user_quad = Vec::with_capacity(dims.n_bs);
        let mut eg = Vec::with_capacity(dims.n_bs);
        let mut rcs = Vec::with_capacity(dims.n_bs);
        for t in 0..dims.n_bs {
            let mut ut = zeros(dims.tx_antennas, r);
            let mut q = zeros(dims.tx_antennas, dims.tx_antennas);
            let mut rc_row = Vec::with_capacity(dims.n_users);
            for l in 0..dims.n_users {
                let rc = &sol.r[l] * &ch.c_hat[t][l];
                ut.columns_mut(l * ns, ns).copy_from(&rc.adjoint());
                q += rc.adjoint() * &rc;
                rc_row.push(rc);
            }
            rcs.push(rc_row);
            let mut row = Vec::with_capacity(dims.n_eves);
            for e in 0..dims.n_eves {
                let m = &sol.e[e] * &ch.g_hat[t][e];
                ut.columns_mut(r_users + e * ns, ns).copy_from(&m.adjoint());
                row.push(m);
            }
            u.push(ut);
            user_quad.push(q);
            eg.push(row);
        }
        let gram = u.iter().map(|ut| ut.adjoint() * ut).collect();
        Self { problem, sol, u, gram, user_quad, eg, rc: rcs, r_users }
    }

    fn r(&self) -> usize {
        self.u[0].ncols()
    }

    fn j_diag(&self, lambda_e: &[f64]) -> Vec<f64> {
        let ns = self.problem.dims.streams;
        let mut j = vec![1.0; self.r_users];
        for &l in lambda_e {
            j.extend(std::iter::repeat_n(-l, ns));
        }
        j
    }

    pub fn eve_state(&self, lambda_e: &[f64]) -> EveState {
        let eig = (0..self.problem.dims.n_bs)
            .map(|t| {
                let mut b = self.user_quad[t].clone();
                for (e, &l) in lambda_e.iter().enumerate() {
                    if l != 0.0 {
                        b -= (self.eg[t][e].adjoint() * &self.eg[t][e]) * c(l, 0.0);
                    }
                }
                let b = (&b + b.adjoint()) * c(0.5, 0.0);
                let ev = b.symmetric_eigen();
                (ev.eigenvalues.iter().copied().collect(), ev.eigenvectors)
            })
            .collect();
        let an_cache = (0..self.problem.dims.n_bs).map(|_| RefCell::new(Vec::new())).collect();
        EveState { lambda_e: lambda_e.to_vec(), eig, an_cache }
    }

    fn shifts(&self, lambda_e: &[f64], lambda_t: &[f64]) -> Vec<f64> {
        (0..self.problem.dims.n_bs)
            .map(|t| a_t_shift(self.problem, self.sol, lambda_e, lambda_t[t], t))
            .collect()
    }

    /// Precoders from the reduced system; `None` when the joint matrix is not
    /// positive definite.
    fn precoders_reduced(&self, j: &[f64], d: &[f64]) -> Option<Vec<ComplexMatrix>> {
        let r = self.r();
        let ns = self.problem.dims.streams;
        let mut k = zeros(r, r);
        for (g, &dt) in self.gram.iter().zip(d) {
            k += g * c(1.0 / dt, 0.0);
        }
        let k = (&k + k.adjoint()) * c(0.5, 0.0);
        if j.iter().any(|&x| x < 0.0) && !self.reduced_is_pd(&k, j) {
            return None;
        }
        let mut m = identity(r);
        for col in 0..r {
            let kc = k.column(col) * c(j[col], 0.0);
            let mut mc = m.column_mut(col);
            mc += kc;
        }
        let mut c0 = zeros(r, ns);
        for blk in 0..r / ns {
            c0.view_mut((blk * ns, 0), (ns, ns)).fill_with_identity();
        }
        let y = m.lu().solve(&c0)?;
        let mut jy = y;
        for (row, &jj) in j.iter().enumerate() {
            jy.row_mut(row).scale_mut(jj);
        }
        Some(self.u.iter().zip(d).map(|(ut, &dt)| (ut * &jy) * c(1.0 / dt, 0.0)).collect())
    }

    /// Whether `D + U J U^H` is positive definite, given `K = U^H D^{-1} U`:
    /// equivalently `I + L^H J L > 0` for `K = L L^H`, or the smallest
    /// eigenvalue of `K^1/2 J K^1/2` above `-1`.
    fn reduced_is_pd(&self, k: &ComplexMatrix, j: &[f64]) -> bool {
        let r = k.nrows();
        if let Some(chol) = pd_cholesky(k.clone()) {
            let l = chol.l();
            let mut jl = l.clone();
            for (row, &jj) in j.iter().enumerate() {
                jl.row_mut(row).scale_mut(jj);
            }
            let m = identity(r) * c(1.0 - PD_MARGIN, 0.0) + l.adjoint() * jl;
            let m = (&m + m.adjoint()) * c(0.5, 0.0);
            return pd_cholesky(m).is_some();
        }
        let ev = k.clone().symmetric_eigen();
        let half = ComplexMatrix::from_fn(r, r, |a, b| {
            let mut s = c(0.0, 0.0);
            for i in 0..r {
                s += ev.eigenvectors[(a, i)] * ev.eigenvalues[i].max(0.0).sqrt() * ev.eigenvectors[(b, i)].conj();
            }
            s
        });
        let mut hj = half.clone();
        for (col, &jj) in j.iter().enumerate() {
            hj.column_mut(col).scale_mut(jj);
        }
        let s = &hj * &half;
        let s = (&s + s.adjoint()) * c(0.5, 0.0);
        s.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min) > -1.0 + PD_MARGIN
    }

    /// Precoders from the full `K_T N_T` system via Cholesky.
    fn precoders_dense(&self, j: &[f64], d: &[f64]) -> Option<Vec<ComplexMatrix>> {
        let dims = &self.problem.dims;
        let (nt, ns, kt) = (dims.tx_antennas, dims.streams, dims.n_bs);
        let r = self.r();
        let mut uj = Vec::with_capacity(kt);
        for ut in &self.u {
            let mut m = ut.clone();
            for (col, &jj) in j.iter().enumerate() {
                m.column_mut(col).scale_mut(jj);
            }
            uj.push(m);
        }
        let mut a = zeros(kt * nt, kt * nt);
        let mut b = zeros(kt * nt, ns);
        for t in 0..kt {
            for s in 0..kt {
                let blk = &uj[t] * self.u[s].adjoint();
                a.view_mut((t * nt, s * nt), (nt, nt)).copy_from(&blk);
            }
            for i in 0..nt {
                a[(t * nt + i, t * nt + i)] += c(d[t], 0.0);
            }
            let mut bt = zeros(nt, ns);
            for blk in 0..r / ns {
                bt += uj[t].columns(blk * ns, ns);
            }
            b.view_mut((t * nt, 0), (nt, ns)).copy_from(&bt);
        }
        let a = (&a + a.adjoint()) * c(0.5, 0.0);
        let chol = pd_cholesky(a)?;
        // Reject numerically semidefinite systems: (max/min pivot)^2 bounds
        // the condition number from below.
        let l = chol.l_dirty();
        let (lo, hi) = (0..kt * nt).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
            let p = l[(i, i)].re.abs();
            (lo.min(p), hi.max(p))
        });
        if !(lo > 0.0) || (hi / lo).powi(2) > crate::numerics::MAX_CONDITION {
            return None;
        }
        let v = chol.solve(&b);
        Some((0..kt).map(|t| v.view((t * nt, 0), (nt, ns)).into_owned()).collect())
    }

    /// Everything the multiplier residual needs at `(lambda_e, lambda_t)`.
    pub fn evaluate(&self, state: &EveState, lambda_t: &[f64]) -> Option<Evaluation> {
        let dims = &self.problem.dims;
        let lambda_e = &state.lambda_e;
        let j = self.j_diag(lambda_e);
        let d = self.shifts(lambda_e, lambda_t);
        let v = if d.iter().all(|&x| x > 1e-300) {
            self.precoders_reduced(&j, &d)?
        } else {
            self.precoders_dense(&j, &d)?
        };
        if v.iter().any(|m| !crate::numerics::all_finite(m)) {
            return None;
        }
        let an: Vec<Rc<AnShaper>> = (0..dims.n_bs).map(|t| self.an_shaper(state, t, d[t])).collect();
        let w2: Vec<f64> = an.iter().map(|a| a.w2).collect();
        let power = (0..dims.n_bs).map(|t| fro2(&v[t]) + dims.an_var[t] * w2[t]).collect();
        let eps_e = (0..dims.n_eves)
            .map(|e| {
                let links: Vec<&ComplexMatrix> = self.eg.iter().map(|row| &row[e]).collect();
                let s = |t: usize| self.problem.u.eve.get(t, e);
                let leak = |t: usize| an[t].eve[e];
                let f = &self.sol.e[e];
                self.filtered_mse(&links, f, dims.noise_var_eve[e], self.problem.flags.chi_e, s, &v, &w2, leak)
            })
            .collect();
        let smse = (0..dims.n_users)
            .map(|l| {
                let links: Vec<&ComplexMatrix> = self.rc.iter().map(|row| &row[l]).collect();
                let s = |t: usize| self.problem.u.leg.get(t, l);
                let leak = |t: usize| an[t].user[l];
                let f = &self.sol.r[l];
                self.filtered_mse(&links, f, dims.noise_var_user[l], self.problem.flags.chi_l, s, &v, &w2, leak)
            })
            .sum();
        let w = an.iter().map(|a| a.w.clone()).collect();
        Some(Evaluation { v, w, power, eps_e, smse })
    }

    /// AN shaper of BS `t` for shift `d_t`, built once per retained
    /// eigenvector set.
    fn an_shaper(&self, state: &EveState, t: usize, dt: f64) -> Rc<AnShaper> {
        let (vals, vecs) = &state.eig[t];
        let sv: Vec<f64> = vals.iter().map(|x| (x + dt).abs()).collect();
        let (keep, _) = null_space_indices(&sv, DEFAULT_NULL_TOL);
        let mut cache = state.an_cache[t].borrow_mut();
        if let Some((_, a)) = cache.iter().find(|(k, _)| *k == keep) {
            return a.clone();
        }
        let p = projector_onto(vecs, &keep);
        let w = &p / c(p.norm(), 0.0);
        let a = Rc::new(AnShaper {
            w2: fro2(&w),
            user: self.rc[t].iter().map(|m| fro2(&(m * &w))).collect(),
            eve: self.eg[t].iter().map(|m| fro2(&(m * &w))).collect(),
            w,
        });
        cache.push((keep, a.clone()));
        a
    }

    /// Closed-form MSE of a receiver whose filter-times-channel products
    /// `links[t] = F H_t` are precomputed.
    #[allow(clippy::too_many_arguments)]
    fn filtered_mse(
        &self,
        links: &[&ComplexMatrix],
        f: &ComplexMatrix,
        noise_var: f64,
        robust: bool,
        s: impl Fn(usize) -> f64,
        v: &[ComplexMatrix],
        w2: &[f64],
        leak: impl Fn(usize) -> f64,
    ) -> f64 {
        let dims = &self.problem.dims;
        let ns = dims.streams;
        let mut fh = zeros(ns, ns);
        for t in 0..dims.n_bs {
            fh += links[t] * &v[t];
        }
        let f2 = fro2(f);
        let mut eps = ns as f64 - 2.0 * trace_re(&fh) + fro2(&fh) + noise_var * f2;
        let mut acc = 0.0;
        for t in 0..dims.n_bs {
            let z = dims.an_var[t];
            if z != 0.0 {
                eps += z * leak(t);
            }
            acc += s(t) * (fro2(&v[t]) + z * w2[t]);
        }
        if robust {
            eps += f2 * acc;
        }
        eps
    }

    /// Typical magnitude of `A_t`'s user part, used for scaling.
    fn typical_shift(&self, t: usize) -> f64 {
        let n = self.problem.dims.tx_antennas as f64;
        (trace_re(&self.user_quad[t]) / n).max(1e-12)
    }

    /// Power multiplier that would spend the budget if `A_t` were `lambda I`.
    fn cold_start(&self, t: usize) -> f64 {
        let dims = &self.problem.dims;
        let ns = dims.streams;
        let mut b = zeros(dims.tx_antennas, ns);
        for l in 0..dims.n_users {
            b += self.u[t].columns(l * ns, ns);
        }
        let budget = (dims.max_power - dims.an_var[t]).max(1e-12 * dims.max_power);
        b.norm() / budget.sqrt()
    }
}

/// Dual value, gradient and complementarity residual at one multiplier point.
struct DualPoint {
    x: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
    residual: f64,
    eval: Evaluation,
}

/// Solves the eavesdropper-MSE and power complementarity conditions for the
/// multipliers, warm-started from `sol`'s multipliers.
pub fn solve_multipliers(problem: &DesignProblem, sol: &TransceiverSolution) -> Result<MultiplierSolution> {
    solve_and_evaluate(problem, sol).map(|(m, _)| m)
}

pub(crate) fn solve_and_evaluate(
    problem: &DesignProblem,
    sol: &TransceiverSolution,
) -> Result<(MultiplierSolution, Evaluation)> {
    let dims = &problem.dims;
    let (ke, kt) = (dims.n_eves, dims.n_bs);
    let n = ke + kt;
    let p_t = dims.max_power;
    let gamma = dims.eve_mse_floor;
    let sys = PrecoderSystem::new(problem, sol);

    // Unknowns: lambda_e, then lambda_t * P_T so that the gradient blocks are
    // an MSE gap and a relative power gap.
    let split = |x: &[f64]| -> (Vec<f64>, Vec<f64>) {
        (x[..ke].to_vec(), x[ke..].iter().map(|v| v / p_t).collect())
    };
    let point = |x: Vec<f64>, state: Option<&EveState>| -> Option<DualPoint> {
        let (le, lt) = split(&x);
        let owned;
        let state = match state {
            Some(s) => s,
            None => {
                owned = sys.eve_state(&le);
                &owned
            }
        };
        let eval = sys.evaluate(state, &lt)?;
        let mut value = eval.smse;
        let mut grad = Vec::with_capacity(n);
        let mut residual: f64 = 0.0;
        for e in 0..ke {
            let slack = eval.eps_e[e] - gamma;
            value -= x[e] * slack;
            grad.push(-slack);
            residual = residual.max(x[e].min(slack).abs());
        }
        for t in 0..kt {
            let slack = (p_t - eval.power[t]) / p_t;
            value -= x[ke + t] * slack;
            grad.push(-slack);
            residual = residual.max(x[ke + t].min(slack).abs());
        }
        if !value.is_finite() {
            return None;
        }
        Some(DualPoint { x, value, grad, residual, eval })
    };

    // Power multipliers are kept above a tiny floor: with no robust terms the
    // joint system is singular at zero power multiplier.
    let mut lb = vec![0.0; n];
    for t in 0..kt {
        lb[ke + t] = POWER_MULTIPLIER_FLOOR * sys.typical_shift(t) * p_t;
    }

    let min_floor = lb[ke..].iter().copied().fold(f64::INFINITY, f64::min).max(1e-300);

    // Warm start, then raise the power multipliers until the joint system is
    // positive definite.
    let mut x: Vec<f64> = sol.lambda_e.iter().map(|v| v.max(0.0)).collect();
    for t in 0..kt {
        let warm = sol.lambda_t[t] * p_t;
        x.push(if warm > 0.0 { warm.max(lb[ke + t]) } else { sys.cold_start(t) * p_t });
    }
    let mut cur = None;
    for _ in 0..80 {
        if let Some(found) = point(x.clone(), None) {
            cur = Some(found);
            break;
        }
        for t in 0..kt {
            x[ke + t] = 2.0 * x[ke + t] + sys.typical_shift(t) * p_t;
        }
    }
    let mut cur = cur.ok_or(Error::NoConvergence { iterations: 0, residual: f64::INFINITY })?;
    let mut iterations = 0;
    let mut best_residual = cur.residual;
    let mut stalled = 0;

    while cur.residual > MULTIPLIER_TOL && iterations < MAX_MULTIPLIER_ITERS {
        iterations += 1;
        // An eavesdropper multiplier leaving zero usually needs larger power
        // multipliers to keep the joint system positive definite, which the
        // Newton step cannot see from the bound.
        for e in 0..ke {
            if cur.x[e] == 0.0 && cur.grad[e] > 0.0 {
                if let Some(p) = release_eve(&cur, e, &sys, &point, ke, kt, p_t) {
                    cur = p;
                }
            }
        }
        if cur.residual <= MULTIPLIER_TOL {
            break;
        }
        // Bound-active coordinates: at the floor with the ascent direction
        // pointing outward.
        let free: Vec<usize> =
            (0..n).filter(|&i| !(cur.x[i] <= lb[i] * (1.0 + 1e-12) && cur.grad[i] <= 0.0)).collect();
        if free.is_empty() {
            break;
        }
        // Hessian of the free block from forward differences of the gradient.
        let base_state = sys.eve_state(&cur.x[..ke]);
        let m = free.len();
        let mut hess = DMatrix::<f64>::zeros(m, m);
        for (jj, &j) in free.iter().enumerate() {
            let h = 1e-5 * cur.x[j].max(lb[j]).max(min_floor);
            let state = if j < ke { None } else { Some(&base_state) };
            let mut xp = cur.x.clone();
            xp[j] += h;
            let (p, step) = match point(xp.clone(), state) {
                Some(p) => (p, h),
                None => {
                    xp[j] = cur.x[j] - h;
                    match point(xp, state) {
                        Some(p) if cur.x[j] - h >= lb[j] => (p, -h),
                        _ => continue,
                    }
                }
            };
            for (ii, &i) in free.iter().enumerate() {
                hess[(ii, jj)] = (p.grad[i] - cur.grad[i]) / step;
            }
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        // Newton direction for maximization with the curvature forced negative.
        let eig = hess.symmetric_eigen();
        let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
        let g_free = DMatrix::from_fn(m, 1, |i, _| cur.grad[free[i]]);
        let qtg = eig.eigenvectors.transpose() * &g_free;
        let mut dir_q = qtg.clone();
        for i in 0..m {
            let curv = eig.eigenvalues[i].min(-1e-8 * scale);
            dir_q[i] = -qtg[i] / curv;
        }
        let dir_free = &eig.eigenvectors * dir_q;
        let mut dir = vec![0.0; n];
        for (ii, &i) in free.iter().enumerate() {
            dir[i] = dir_free[ii];
        }
        // Projected backtracking line search with an Armijo test.
        let mut alpha = 1.0;
        let mut next = None;
        for _ in 0..50 {
            let xn: Vec<f64> = (0..n).map(|i| (cur.x[i] + alpha * dir[i]).max(lb[i])).collect();
            if let Some(p) = point(xn, None) {
                let gain: f64 = (0..n).map(|i| cur.grad[i] * (p.x[i] - cur.x[i])).sum();
                if p.value >= cur.value + 1e-4 * gain.max(0.0) {
                    next = Some(p);
                    break;
                }
            }
            alpha *= 0.5;
        }
        match next {
            Some(p) => {
                // The dual can be flat to machine precision; stop once the
                // residual has not improved for a few steps.
                if p.residual < 0.99 * best_residual {
                    best_residual = p.residual;
                    stalled = 0;
                } else {
                    stalled += 1;
                }
                cur = p;
            }
            None => break,
        }
        if stalled >= STALL_LIMIT {
            break;
        }
    }

    let (lambda_e, lambda_t) = split(&cur.x);
    Ok((
        MultiplierSolution {
            lambda_e,
            lambda_t,
            residual: cur.residual,
            iterations,
            converged: cur.residual <= MULTIPLIER_TOL,
        },
        cur.eval,
    ))
}

/// Moves eavesdropper multiplier `e` off zero, raising the power multipliers
/// as needed for positive definiteness. Returns the first candidate that
/// increases the dual value.
fn release_eve(
    cur: &DualPoint,
    e: usize,
    sys: &PrecoderSystem,
    point: &impl Fn(Vec<f64>, Option<&EveState>) -> Option<DualPoint>,
    ke: usize,
    kt: usize,
    p_t: f64,
) -> Option<DualPoint> {
    let eve_scale: Vec<f64> = (0..kt).map(|t| fro2(&sys.eg[t][e]) * p_t).collect();
    let mut v = cur.grad[e].clamp(1e-6, 1.0);
    for _ in 0..30 {
        let mut x = cur.x.clone();
        x[e] = v;
        let mut k = 0.0;
        for _ in 0..40 {
            if let Some(p) = point(x.clone(), None) {
                if p.value > cur.value {
                    return Some(p);
                }
                break;
            }
            k = if k == 0.0 { 1.0 } else { 2.0 * k };
            for t in 0..kt {
                x[ke + t] = cur.x[ke + t] + k * v * eve_scale[t];
            }
        }
        v *= 0.25;
    }
    None
}

/// Precoders and AN shapers of every BS at fixed multipliers, solving the
/// coupled stationarity conditions jointly.
pub fn joint_precoders(
    problem: &DesignProblem,
    sol: &TransceiverSolution,
    mult: &Multipliers,
) -> Result<(Vec<ComplexMatrix>, Vec<ComplexMatrix>)> {
    let sys = PrecoderSystem::new(problem, sol);
    let state = sys.eve_state(&mult.lambda_e);
    let ev = sys
        .evaluate(&state, &mult.lambda_t)
        .ok_or(Error::SingularMatrix { cond: f64::INFINITY })?;
    Ok((ev.v, ev.w))
}
