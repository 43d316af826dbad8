//! Dense complex linear algebra helpers and the deterministic RNG.
//!
//! Every matrix in the crate is a [`ComplexMatrix`]. Random draws go through
//! [`SimRng`], which derives independent substreams from a seed and an index
//! path so parallel Monte-Carlo work stays bit-reproducible.

use nalgebra::{Cholesky, DMatrix, Dyn};
pub use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Condition estimates above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Default relative threshold for treating a singular value as null.
pub const DEFAULT_NULL_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Real part of the trace.
pub fn trace_re(m: &ComplexMatrix) -> f64 {
    m.trace().re
}

/// Squared Frobenius norm.
pub fn fro2(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `Re tr(A^H B)`, the real inner product of two equally shaped matrices.
pub fn inner_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius closeness with absolute floor 1e-12 and relative 1e-8.
pub fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
    approx_eq_tol(a, b, 1e-8)
}

pub fn approx_eq_tol(a: &ComplexMatrix, b: &ComplexMatrix, rel: f64) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    let diff = (a - b).norm();
    diff <= 1e-12 + rel * a.norm().max(b.norm())
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).norm() <= tol * (1.0 + m.norm())
}

/// Splitmix64 finalizer, used to derive substream keys.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded ChaCha8 stream with hierarchical substreams.
///
/// `substream(i)` depends only on the parent's key and `i`, never on how many
/// values the parent has already produced.
#[derive(Clone, Debug)]
pub struct SimRng {
    key: u64,
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self::from_key(splitmix64(seed))
    }

    fn from_key(key: u64) -> Self {
        let mut bytes = [0u8; 32];
        for (i, chunk) in bytes.chunks_mut(8).enumerate() {
            let word = splitmix64(key ^ (i as u64).wrapping_mul(0xA24B_AED4_963E_E407));
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        Self { key, inner: ChaCha8Rng::from_seed(bytes) }
    }

    pub fn substream(&self, index: u64) -> SimRng {
        Self::from_key(splitmix64(self.key ^ splitmix64(index.wrapping_add(1))))
    }

    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits in [0, 1).
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Circularly-symmetric complex Gaussian with `E|z|^2 = var`.
    pub fn complex_normal(&mut self, var: f64) -> Complex64 {
        let s = (var / 2.0).sqrt();
        let re = self.normal();
        let im = self.normal();
        c(s * re, s * im)
    }

    /// Matrix with i.i.d. `CN(0, var)` entries, filled column by column.
    pub fn complex_gaussian(&mut self, rows: usize, cols: usize, var: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| self.complex_normal(var))
    }

    pub fn bit(&mut self) -> u8 {
        (self.inner.next_u32() & 1) as u8
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n.saturating_sub(1))
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn norm1(m: &ComplexMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Cholesky factorization of a Hermitian matrix, or `None` unless every pivot
/// is real and positive.
///
/// The complex square root never fails, so the factorization routine alone
/// does not detect indefinite input.
pub fn pd_cholesky(m: ComplexMatrix) -> Option<Cholesky<Complex64, Dyn>> {
    let chol = m.cholesky()?;
    let l = chol.l_dirty();
    let ok = (0..l.nrows()).all(|i| {
        let p = l[(i, i)];
        p.re > 0.0 && p.im.abs() <= 1e-12 * p.re && p.re.is_finite()
    });
    ok.then_some(chol)
}

/// Solves `A X = B` for square `A` by partially pivoted LU.
///
/// A is treated as general even when it is nominally Hermitian. The 1-norm
/// condition estimate is computed from the explicit inverse, which is cheap at
/// the matrix sizes used here.
pub fn hermitian_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "solve with A {:?} and B {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if !all_finite(a) || !all_finite(b) {
        return Err(Error::InvalidInput("non-finite entries in linear system".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(b.clone());
    }
    let lu = a.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::SingularMatrix { cond: f64::INFINITY })?;
    let cond = norm1(a) * norm1(&inv);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::SingularMatrix { cond });
    }
    let mut x = lu.solve(b).ok_or(Error::SingularMatrix { cond })?;
    // One step of iterative refinement.
    let r = b - a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Ok(x)
}

/// Singular values and right singular vectors (as columns), in the order the
/// decomposition returns them. Hermitian inputs go through the eigensolver.
fn right_singular_pairs(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.ncols();
    if a.is_square() && is_hermitian(a, 1e-13) {
        let eig = a.clone().symmetric_eigen();
        let sv = eig.eigenvalues.iter().map(|x| x.abs()).collect();
        return (sv, eig.eigenvectors);
    }
    let padded = if a.nrows() < n {
        let mut p = zeros(n, n);
        p.rows_mut(0, a.nrows()).copy_from(a);
        p
    } else {
        a.clone()
    };
    // After padding there are exactly n right singular vectors.
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = svd.singular_values.iter().copied().collect::<Vec<_>>();
    (sv, v_t.adjoint())
}

/// Outcome of a rank-revealing null-space split.
#[derive(Clone, Debug)]
pub struct NullSpace {
    pub projector: ComplexMatrix,
    /// Singular values of the directions kept in the projector.
    pub retained: Vec<f64>,
    /// True when no singular value fell below threshold and the
    /// smallest-singular-direction projector was returned instead.
    pub fallback: bool,
}

/// Projector onto the right near-null space of `a`.
///
/// Directions with `sigma_i <= tol * sigma_max` are kept. If none qualify, the
/// rank-1 projector onto the smallest singular direction is returned (lowest
/// index wins ties).
pub fn null_space(a: &ComplexMatrix, tol: f64) -> NullSpace {
    let (sv, vecs) = right_singular_pairs(a);
    null_space_from_pairs(&sv, &vecs, tol)
}

/// Indices of the directions treated as null, and whether the fallback
/// (single smallest direction) was used.
pub fn null_space_indices(sv: &[f64], tol: f64) -> (Vec<usize>, bool) {
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let thresh = tol * smax;
    let mut keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= thresh).collect();
    let fallback = keep.is_empty();
    if fallback {
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let tie = 1e-12 * smax.max(f64::MIN_POSITIVE);
        let idx = (0..sv.len()).find(|&i| sv[i] - smin <= tie).unwrap_or(0);
        keep.push(idx);
    }
    (keep, fallback)
}

/// Orthogonal projector onto the given eigenvector columns.
pub fn projector_onto(vecs: &ComplexMatrix, keep: &[usize]) -> ComplexMatrix {
    let n = vecs.nrows();
    let mut p = zeros(n, n);
    for &i in keep {
        let v = vecs.column(i);
        let v = &v / c(v.norm(), 0.0);
        p += &v * v.adjoint();
    }
    // Symmetrize away rounding.
    (&p + p.adjoint()) * c(0.5, 0.0)
}

pub fn null_space_from_pairs(sv: &[f64], vecs: &ComplexMatrix, tol: f64) -> NullSpace {
    let (keep, fallback) = null_space_indices(sv, tol);
    let projector = projector_onto(vecs, &keep);
    NullSpace { projector, retained: keep.iter().map(|&i| sv[i]).collect(), fallback }
}

pub fn null_space_projector(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    null_space(a, tol).projector
}

/// Central-difference Wirtinger gradient `(df/dRe + i df/dIm) / 2`, entrywise.
pub fn finite_diff_gradient<F>(f: F, x: &ComplexMatrix, h: f64) -> ComplexMatrix
where
    F: Fn(&ComplexMatrix) -> f64,
{
    let mut g = zeros(x.nrows(), x.ncols());
    let mut xp = x.clone();
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            let orig = x[(i, j)];
            xp[(i, j)] = orig + c(h, 0.0);
            let fp = f(&xp);
            xp[(i, j)] = orig - c(h, 0.0);
            let fm = f(&xp);
            let d_re = (fp - fm) / (2.0 * h);
            xp[(i, j)] = orig + c(0.0, h);
            let fp = f(&xp);
            xp[(i, j)] = orig - c(0.0, h);
            let fm = f(&xp);
            let d_im = (fp - fm) / (2.0 * h);
            xp[(i, j)] = orig;
            g[(i, j)] = c(d_re / 2.0, d_im / 2.0);
        }
    }
    g
}
