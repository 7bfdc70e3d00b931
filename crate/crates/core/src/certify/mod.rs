//! Numerical evidence for complete monotonicity.
//!
//! A function f is completely monotonic (CM) when `(−1)ⁿf⁽ⁿ⁾ ≥ 0` for every
//! n. The sweeps here test the discrete analogue `(−1)ⁿΔₕⁿf(x) ≥ 0` on a
//! grid of points, orders and steps, and report every sample that falls
//! below a rounding slack of `64·ε·n!·max|f|` over its stencil.
//!
//! A clean sweep is evidence, not proof.

pub mod bounds;

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::grid;
use crate::specfun::{factorial, EvalPoint};
use crate::theta::{theta_alpha_deriv_with_scale, AlphaExponent, THETA_ALPHA_MAX_ORDER};

/// Multiplier of `ε` in the rounding slack.
pub const SLACK_FACTOR: f64 = 64.0;

/// Largest difference order [`certify_cm`] accepts.
pub const MAX_ORDER: usize = 12;

pub const DEFAULT_MAX_ORDER: usize = 10;

pub const DEFAULT_STEPS: [f64; 2] = [0.25, 1.0];

/// 60 log-spaced points on `[1e−3, 1e3]`.
pub fn default_grid() -> Vec<EvalPoint> {
    grid::log_spaced(1e-3, 1e3, 60).expect("static grid bounds are valid")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("order {order} exceeds the maximum {max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("grid is empty")]
    EmptyGrid,
    #[error("no steps given")]
    NoSteps,
    #[error("evaluator returned {value} at x = {x}")]
    Evaluation { x: f64, value: f64 },
    #[error("function must be positive, got {value} at x = {x}")]
    NonPositiveValue { x: f64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConsistentCm,
    Violation,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ConsistentCm => "CONSISTENT_CM",
            Verdict::Violation => "VIOLATION",
        })
    }
}

/// One signed difference `(−1)ⁿΔₕⁿf(x)` with its rounding slack.
///
/// Analytic sweeps store `h = 0` and the signed derivative `(−1)ⁿf⁽ⁿ⁾(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub n: usize,
    pub h: f64,
    pub x: f64,
    pub value: f64,
    pub slack: f64,
}

impl Sample {
    pub fn is_violation(&self) -> bool {
        self.value < -self.slack
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CMReport {
    pub function_id: String,
    pub grid: Vec<EvalPoint>,
    pub max_order: usize,
    pub steps: Vec<f64>,
    /// Minimum signed value over all samples.
    pub min_signed: f64,
    pub verdict: Verdict,
    /// Samples below their slack, sorted by `(n, h, x)`.
    pub witnesses: Vec<Sample>,
    /// Every sample, sorted by `(n, h, x)`.
    pub samples: Vec<Sample>,
    /// Samples dropped because the function was not finite on the stencil.
    pub excluded: usize,
}

impl CMReport {
    fn assemble(
        function_id: &str,
        grid: &[EvalPoint],
        max_order: usize,
        steps: &[f64],
        mut samples: Vec<Sample>,
        excluded: usize,
    ) -> Self {
        samples.sort_by(|a, b| {
            a.n.cmp(&b.n)
                .then(a.h.total_cmp(&b.h))
                .then(a.x.total_cmp(&b.x))
        });
        let min_signed = samples
            .iter()
            .map(|s| s.value)
            .fold(f64::INFINITY, f64::min);
        let witnesses: Vec<Sample> = samples.iter().copied().filter(Sample::is_violation).collect();
        let verdict = if witnesses.is_empty() {
            Verdict::ConsistentCm
        } else {
            Verdict::Violation
        };
        CMReport {
            function_id: function_id.to_string(),
            grid: grid.to_vec(),
            max_order,
            steps: steps.to_vec(),
            min_signed,
            verdict,
            witnesses,
            samples,
            excluded,
        }
    }

    /// CSV rows `function_id,n,h,x,value,verdict`, one per sample, where the
    /// verdict column marks whether that sample is a violation.
    pub fn write_csv_rows(&self, out: &mut String) {
        use std::fmt::Write;
        for s in &self.samples {
            let verdict = if s.is_violation() {
                Verdict::Violation
            } else {
                Verdict::ConsistentCm
            };
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{}",
                self.function_id, s.n, s.h, s.x, s.value, verdict
            );
        }
    }
}

pub const CSV_HEADER: &str = "function_id,n,h,x,value,verdict";

/// Sums with pairwise recursion, keeping the error growth logarithmic.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 4 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for j in 1..=n {
        row[j] = row[j - 1] * (n + 1 - j) as f64 / j as f64;
    }
    row
}

// (−1)ⁿ Σ_j (−1)^j C(n,j) v[n−j] for stencil values v[m] = f(x + m·h).
fn signed_difference(values: &[f64], n: usize) -> f64 {
    let binom = binomial_row(n);
    let terms: Vec<f64> = (0..=n)
        .map(|j| {
            let sign = if (n + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binom[j] * values[n - j]
        })
        .collect();
    pairwise_sum(&terms)
}

fn slack(values: &[f64], n: usize) -> f64 {
    let max = values[..=n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    SLACK_FACTOR * f64::EPSILON * factorial(n) * max
}

/// `(−1)ⁿ·Σ_{j=0}^{n} (−1)^j·C(n,j)·f(x + (n−j)h)`, summed pairwise.
///
/// Fails if `f` is not finite anywhere on the stencil.
pub fn alternating_difference<F: Fn(f64) -> f64>(
    f: F,
    n: usize,
    h: f64,
    x: EvalPoint,
) -> Result<f64, CertifyError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(CertifyError::InvalidStep(h));
    }
    let values = stencil(&f, x.get(), h, n)?;
    Ok(signed_difference(&values, n))
}

fn stencil<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64, n: usize) -> Result<Vec<f64>, CertifyError> {
    (0..=n)
        .map(|m| {
            let at = x + m as f64 * h;
            let value = f(at);
            if value.is_finite() {
                Ok(value)
            } else {
                Err(CertifyError::Evaluation { x: at, value })
            }
        })
        .collect()
}

fn check_inputs(grid: &[EvalPoint], max_order: usize, max: usize, steps: &[f64]) -> Result<(), CertifyError> {
    if max_order > max {
        return Err(CertifyError::OrderOutOfRange {
            order: max_order,
            max,
        });
    }
    if grid.is_empty() {
        return Err(CertifyError::EmptyGrid);
    }
    if steps.is_empty() {
        return Err(CertifyError::NoSteps);
    }
    if let Some(&h) = steps.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(CertifyError::InvalidStep(h));
    }
    Ok(())
}

// Shared difference sweep over orders min_order..=max_order.
fn sweep<F>(
    f: &F,
    grid: &[EvalPoint],
    min_order: usize,
    max_order: usize,
    steps: &[f64],
) -> (Vec<Sample>, usize)
where
    F: Fn(f64) -> f64 + Sync,
{
    let per_point: Vec<(Vec<Sample>, usize)> = grid
        .par_iter()
        .map(|x| {
            let x = x.get();
            let mut samples = Vec::new();
            let mut excluded = 0;
            for &h in steps {
                // one stencil per (x, h) serves every order
                let values: Vec<f64> = (0..=max_order).map(|m| f(x + m as f64 * h)).collect();
                for n in min_order..=max_order {
                    if values[..=n].iter().all(|v| v.is_finite()) {
                        samples.push(Sample {
                            n,
                            h,
                            x,
                            value: signed_difference(&values, n),
                            slack: slack(&values, n),
                        });
                    } else {
                        excluded += 1;
                    }
                }
            }
            (samples, excluded)
        })
        .collect();
    let excluded = per_point.iter().map(|p| p.1).sum();
    let samples = per_point.into_iter().flat_map(|p| p.0).collect();
    (samples, excluded)
}

/// Sweeps `(−1)ⁿΔₕⁿf(x)` over every grid point, order `0..=max_order` and
/// step.
///
/// The verdict is [`Verdict::Violation`] when any sample is below
/// `−64·ε·n!·max|f|` (maximum over that sample's stencil); each such sample
/// is a witness. Stencils on which `f` is not finite are excluded and
/// counted, not treated as failures.
pub fn certify_cm<F>(
    function_id: &str,
    f: F,
    grid: &[EvalPoint],
    max_order: usize,
    steps: &[f64],
) -> Result<CMReport, CertifyError>
where
    F: Fn(f64) -> f64 + Sync,
{
    check_inputs(grid, max_order, MAX_ORDER, steps)?;
    let (samples, excluded) = sweep(&f, grid, 0, max_order, steps);
    Ok(CMReport::assemble(function_id, grid, max_order, steps, samples, excluded))
}

/// Checks `(−1)ⁱθ_α⁽ⁱ⁾(x) ≥ −slack` from closed-form derivatives, `i ≤ 8`.
///
/// The slack is `64·ε` times the sum of magnitudes of the Leibniz and
/// polygamma terms that make up the derivative.
pub fn certify_cm_analytic(
    alpha: AlphaExponent,
    grid: &[EvalPoint],
    max_order: usize,
) -> Result<CMReport, CertifyError> {
    check_inputs(grid, max_order, THETA_ALPHA_MAX_ORDER, &[1.0])?;
    let a = alpha.get();
    let per_point: Vec<(Vec<Sample>, usize)> = grid
        .par_iter()
        .map(|x| {
            let x = x.get();
            let mut samples = Vec::new();
            let mut excluded = 0;
            for n in 0..=max_order {
                let (d, scale) = theta_alpha_deriv_with_scale(a, n, x);
                if d.is_finite() && scale.is_finite() {
                    let value = if n % 2 == 0 { d } else { -d };
                    let slack = SLACK_FACTOR * f64::EPSILON * scale;
                    samples.push(Sample { n, h: 0.0, x, value, slack });
                } else {
                    excluded += 1;
                }
            }
            (samples, excluded)
        })
        .collect();
    let excluded = per_point.iter().map(|p| p.1).sum();
    let samples = per_point.into_iter().flat_map(|p| p.0).collect();
    let id = format!("theta[{a}]/analytic");
    Ok(CMReport::assemble(&id, grid, max_order, &[], samples, excluded))
}

/// Logarithmic complete monotonicity: sweeps `ln g` over orders
/// `1..=max_order` (order 0 is not part of the definition).
pub fn certify_lcm<G>(
    function_id: &str,
    g: G,
    grid: &[EvalPoint],
    max_order: usize,
    steps: &[f64],
) -> Result<CMReport, CertifyError>
where
    G: Fn(f64) -> f64 + Sync,
{
    check_inputs(grid, max_order, MAX_ORDER, steps)?;
    // positivity on every stencil point is a precondition, checked up front
    for x in grid {
        for &h in steps {
            for m in 0..=max_order {
                let at = x.get() + m as f64 * h;
                let value = g(at);
                if value.is_nan() || value <= 0.0 {
                    return Err(CertifyError::NonPositiveValue { x: at, value });
                }
            }
        }
    }
    let ln_g = |t: f64| g(t).ln();
    let (samples, excluded) = sweep(&ln_g, grid, 1, max_order, steps);
    Ok(CMReport::assemble(function_id, grid, max_order, steps, samples, excluded))
}
