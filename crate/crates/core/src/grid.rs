//! Sample grids of evaluation points.

use crate::specfun::{EvalPoint, SpecfunError};

/// `n` log-spaced points from `lo` to `hi`, endpoints included exactly.
///
/// With `n = 1` the grid is `[lo]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Vec<EvalPoint>, SpecfunError> {
    let (l, h) = (EvalPoint::new(lo)?.get().ln(), EvalPoint::new(hi)?.get().ln());
    spaced(lo, hi, n, |t| (l + (h - l) * t).exp())
}

/// `n` evenly spaced points from `lo` to `hi`, endpoints included exactly.
pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Vec<EvalPoint>, SpecfunError> {
    EvalPoint::new(lo)?;
    EvalPoint::new(hi)?;
    spaced(lo, hi, n, |t| lo + (hi - lo) * t)
}

fn spaced(
    lo: f64,
    hi: f64,
    n: usize,
    at: impl Fn(f64) -> f64,
) -> Result<Vec<EvalPoint>, SpecfunError> {
    match n {
        0 => Ok(Vec::new()),
        1 => Ok(vec![EvalPoint::new(lo)?]),
        _ => (0..n)
            .map(|k| {
                let x = if k == 0 {
                    lo
                } else if k == n - 1 {
                    hi
                } else {
                    at(k as f64 / (n - 1) as f64)
                };
                EvalPoint::new(x)
            })
            .collect(),
    }
}
