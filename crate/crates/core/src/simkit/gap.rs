//! Security gap between a legitimate and an eavesdropper BER curve.

use crate::error::{Error, Result};

/// Floor applied to BERs before taking logs, so that error-free points can
/// bound an interpolation.
const BER_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecurityGapResult {
    pub snr_min_legit_db: f64,
    pub snr_max_eve_db: f64,
    pub gap_db: f64,
    pub target_ber_legit: f64,
    pub target_ber_eve: f64,
}

fn crossing(a: (f64, f64), b: (f64, f64), target: f64) -> f64 {
    let la = a.1.max(BER_FLOOR).log10();
    let lb = b.1.max(BER_FLOOR).log10();
    let lt = target.max(BER_FLOOR).log10();
    if la == lb {
        return a.0;
    }
    a.0 + (lt - la) / (lb - la) * (b.0 - a.0)
}

fn check_curve(curve: &[(f64, f64)]) -> Result<()> {
    if curve.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::InvalidInput("curve SNRs must be strictly ascending".into()));
    }
    Ok(())
}

/// Smallest SNR at which the curve reaches `target` from above, with
/// log-linear interpolation between samples.
pub fn snr_min_reaching(curve: &[(f64, f64)], target: f64) -> Result<f64> {
    check_curve(curve)?;
    let first = curve.iter().position(|p| p.1 <= target);
    match first {
        Some(i) if i > 0 => Ok(crossing(curve[i - 1], curve[i], target)),
        _ => Err(Error::TargetNotBracketed { target }),
    }
}

/// Largest SNR at which the curve is still at or above `target`, with
/// log-linear interpolation towards the next sample.
pub fn snr_max_above(curve: &[(f64, f64)], target: f64) -> Result<f64> {
    check_curve(curve)?;
    let last = curve.iter().rposition(|p| p.1 >= target);
    match last {
        Some(i) if i + 1 < curve.len() => Ok(crossing(curve[i], curve[i + 1], target)),
        _ => Err(Error::TargetNotBracketed { target }),
    }
}

/// `snr_min_legit - snr_max_eve` for curves of `(snr_db, ber)` samples.
pub fn security_gap(
    legit: &[(f64, f64)],
    eve: &[(f64, f64)],
    target_legit: f64,
    target_eve: f64,
) -> Result<SecurityGapResult> {
    let snr_min_legit_db = snr_min_reaching(legit, target_legit)?;
    let snr_max_eve_db = snr_max_above(eve, target_eve)?;
    Ok(SecurityGapResult {
        snr_min_legit_db,
        snr_max_eve_db,
        gap_db: snr_min_legit_db - snr_max_eve_db,
        target_ber_legit: target_legit,
        target_ber_eve: target_eve,
    })
}
