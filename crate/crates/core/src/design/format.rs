//! Plain-text solution format.
//!
//! ```text
//! secmimo-solution 1
//! dims <K_T> <K_R> <K_E> <N_T> <N_R> <N_E> <N_s>
//! lambda_e <v>...
//! lambda_t <v>...
//! V <t> <rows> <cols>
//! <re> <im> <re> <im> ...      one line per row
//! ```
//! Blocks follow for every `V`, `W`, `R` and `E` in index order.

use std::fmt::Write as _;

use crate::channel::SystemDims;
use crate::error::{Error, Result};
use crate::mse::TransceiverSolution;
use crate::numerics::{c, ComplexMatrix};

const HEADER: &str = "secmimo-solution 1";

fn write_block(out: &mut String, tag: &str, idx: usize, m: &ComplexMatrix) {
    let _ = writeln!(out, "{tag} {idx} {} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:e} {:e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

pub fn solution_to_text(sol: &TransceiverSolution, dims: &SystemDims) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(
        out,
        "dims {} {} {} {} {} {} {}",
        dims.n_bs,
        dims.n_users,
        dims.n_eves,
        dims.tx_antennas,
        dims.rx_antennas,
        dims.eve_antennas,
        dims.streams
    );
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "lambda_e {}", join(&sol.lambda_e));
    let _ = writeln!(out, "lambda_t {}", join(&sol.lambda_t));
    for (tag, list) in [("V", &sol.v), ("W", &sol.w), ("R", &sol.r), ("E", &sol.e)] {
        for (i, m) in list.iter().enumerate() {
            write_block(&mut out, tag, i, m);
        }
    }
    out
}

/// Parses [`solution_to_text`] output, returning the solution and its
/// dimension counts `[K_T, K_R, K_E, N_T, N_R, N_E, N_s]`.
pub fn solution_from_text(text: &str) -> Result<(TransceiverSolution, [usize; 7])> {
    let bad = |n: usize, msg: &str| Error::InvalidInput(format!("solution line {}: {msg}", n + 1));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == HEADER => {}
        _ => return Err(bad(0, "missing header")),
    }
    let mut dims = [0usize; 7];
    let mut sol = TransceiverSolution {
        v: Vec::new(),
        w: Vec::new(),
        r: Vec::new(),
        e: Vec::new(),
        lambda_e: Vec::new(),
        lambda_t: Vec::new(),
    };
    let floats = |n: usize, fields: &[&str]| -> Result<Vec<f64>> {
        fields.iter().map(|f| f.parse::<f64>().map_err(|_| bad(n, "bad number"))).collect()
    };
    while let Some((n, line)) = lines.next() {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.first().copied() {
            None => {}
            Some("dims") => {
                if f.len() != 8 {
                    return Err(bad(n, "dims needs 7 counts"));
                }
                for (k, d) in dims.iter_mut().enumerate() {
                    *d = f[k + 1].parse().map_err(|_| bad(n, "bad count"))?;
                }
            }
            Some("lambda_e") => sol.lambda_e = floats(n, &f[1..])?,
            Some("lambda_t") => sol.lambda_t = floats(n, &f[1..])?,
            Some(tag @ ("V" | "W" | "R" | "E")) => {
                if f.len() != 4 {
                    return Err(bad(n, "block header needs index, rows, cols"));
                }
                let idx: usize = f[1].parse().map_err(|_| bad(n, "bad index"))?;
                let rows: usize = f[2].parse().map_err(|_| bad(n, "bad rows"))?;
                let cols: usize = f[3].parse().map_err(|_| bad(n, "bad cols"))?;
                let mut m = ComplexMatrix::zeros(rows, cols);
                for i in 0..rows {
                    let (rn, rl) = lines.next().ok_or(bad(n, "truncated block"))?;
                    let vals = floats(rn, &rl.split_whitespace().collect::<Vec<_>>())?;
                    if vals.len() != 2 * cols {
                        return Err(bad(rn, "wrong number of entries"));
                    }
                    for j in 0..cols {
                        m[(i, j)] = c(vals[2 * j], vals[2 * j + 1]);
                    }
                }
                let list = match tag {
                    "V" => &mut sol.v,
                    "W" => &mut sol.w,
                    "R" => &mut sol.r,
                    _ => &mut sol.e,
                };
                if idx != list.len() {
                    return Err(bad(n, "block indices must be consecutive"));
                }
                list.push(m);
            }
            Some(_) => return Err(bad(n, "unknown record")),
        }
    }
    Ok((sol, dims))
}
