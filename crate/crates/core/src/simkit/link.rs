//! QPSK symbols and one block of transmissions through a designed chain.

use num_complex::Complex64;

use crate::channel::{ChannelSet, SystemDims};
use crate::error::{Error, Result};
use crate::mse::TransceiverSolution;
use crate::numerics::{c, ComplexMatrix, SimRng};

/// Gray mapping: the first bit picks the sign of the real part, the second
/// the sign of the imaginary part, 0 meaning positive.
pub fn qpsk_modulate(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::OddLength(bits.len()));
    }
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let level = |b: u8| if b == 0 { a } else { -a };
    Ok(bits.chunks(2).map(|p| c(level(p[0]), level(p[1]))).collect())
}

/// Hard decision per quadrant; the inverse of [`qpsk_modulate`].
pub fn qpsk_demodulate(symbols: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 * symbols.len());
    for s in symbols {
        out.push(u8::from(s.re < 0.0));
        out.push(u8::from(s.im < 0.0));
    }
    out
}

/// Error counts of one block of symbol vectors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinkTrialOutcome {
    pub user_bit_errors: Vec<u64>,
    pub eve_bit_errors: Vec<u64>,
    /// Bits sent per receiver.
    pub bits: u64,
    /// `sum ||d_hat - d||^2` per user.
    pub user_sq_error: Vec<f64>,
    pub eve_sq_error: Vec<f64>,
    /// Symbol vectors sent.
    pub symbols: u64,
}

fn slice_errors(estimate: &ComplexMatrix, bits: &[u8]) -> u64 {
    let decided = qpsk_demodulate(estimate.as_slice());
    decided.iter().zip(bits).filter(|(a, b)| a != b).count() as u64
}

/// Sends `symbols` QPSK symbol vectors through `channels` (taken as the true
/// channels) with the transceivers in `sol`.
///
/// Every BS transmits `V_t d + W_t z_t` with `z_t ~ CN(0, an_var_t I)`; each
/// receiver adds white noise of its variance in `dims` and applies its filter
/// (`R_l` or `E_e`) followed by per-stream hard slicing.
pub fn run_link_trial(
    sol: &TransceiverSolution,
    channels: &ChannelSet,
    dims: &SystemDims,
    symbols: usize,
    rng: &mut SimRng,
) -> Result<LinkTrialOutcome> {
    sol.check(dims)?;
    channels.check(dims)?;
    let ns = dims.streams;
    // Column-major data matrix: each column is one symbol vector, so the
    // bit order of column j is streams 0..ns in turn.
    let bits: Vec<u8> = (0..2 * ns * symbols).map(|_| rng.bit()).collect();
    let data = ComplexMatrix::from_column_slice(ns, symbols, &qpsk_modulate(&bits)?);
    let an: Vec<ComplexMatrix> = (0..dims.n_bs)
        .map(|t| rng.complex_gaussian(dims.tx_antennas, symbols, dims.an_var[t]))
        .collect();
    let tx: Vec<ComplexMatrix> =
        (0..dims.n_bs).map(|t| &sol.v[t] * &data + &sol.w[t] * &an[t]).collect();

    let mut receive = |links: Vec<&ComplexMatrix>, filter: &ComplexMatrix, noise_var: f64| {
        let noise = rng.complex_gaussian(links[0].nrows(), symbols, noise_var);
        let mut est = filter * noise;
        for (link, x) in links.iter().zip(&tx) {
            est += (filter * *link) * x;
        }
        let errs = slice_errors(&est, &bits);
        (errs, (&est - &data).norm_squared())
    };

    let mut out = LinkTrialOutcome { bits: (2 * ns * symbols) as u64, symbols: symbols as u64, ..Default::default() };
    for l in 0..dims.n_users {
        let links = channels.c_hat.iter().map(|row| &row[l]).collect();
        let (errs, sq) = receive(links, &sol.r[l], dims.noise_var_user[l]);
        out.user_bit_errors.push(errs);
        out.user_sq_error.push(sq);
    }
    for e in 0..dims.n_eves {
        let links = channels.g_hat.iter().map(|row| &row[e]).collect();
        let (errs, sq) = receive(links, &sol.e[e], dims.noise_var_eve[e]);
        out.eve_bit_errors.push(errs);
        out.eve_sq_error.push(sq);
    }
    Ok(out)
}
