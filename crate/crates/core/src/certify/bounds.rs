//! Catalog of two-sided inequalities and their verifier.
//!
//! Every entry compares a target against a lower and an upper evaluator on
//! a domain, strict or not on each side. Missing sides evaluate to ±∞.
//! Entries involving Γ are compared in log space.

use std::fmt::Write;

use crate::grid;
use crate::specfun::{ln_gamma, log_minus_psi, polygamma_raw, EvalPoint, EULER_GAMMA, HALF_LN_2PI};
use crate::theta::theta1_raw;

/// Default number of log-spaced samples per entry.
pub const DEFAULT_POINTS: usize = 200;

/// Sampling window applied to unbounded domains.
pub const DEFAULT_WINDOW: (f64, f64) = (1e-3, 1e3);

/// Pairs closer than this are skipped; the exponent 1/(x − y) amplifies noise.
pub const PAIR_EXCLUSION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub const fn left_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: true }
    }

    pub const fn right_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: false }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

/// A finite union of intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain(pub Vec<Interval>);

impl Domain {
    pub fn contains(&self, x: f64) -> bool {
        self.0.iter().any(|i| i.contains(x))
    }

    fn hull(&self) -> (f64, f64) {
        let lo = self.0.iter().map(|i| i.lo).fold(f64::INFINITY, f64::min);
        let hi = self.0.iter().map(|i| i.hi).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Point,
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arg {
    Point(f64),
    Pair(f64, f64),
}

impl Arg {
    fn first(self) -> f64 {
        match self {
            Arg::Point(x) | Arg::Pair(x, _) => x,
        }
    }

    fn second(self) -> Option<f64> {
        match self {
            Arg::Point(_) => None,
            Arg::Pair(_, y) => Some(y),
        }
    }
}

pub type Evaluator = fn(Arg) -> f64;

/// A named inequality `lower(·) ⋚ target(·) ⋚ upper(·)` on a domain.
#[derive(Debug, Clone)]
pub struct BoundSpec {
    pub name: &'static str,
    /// Short human-readable statement of the inequality.
    pub anchor: &'static str,
    pub domain: Domain,
    pub arity: Arity,
    /// Where sample grids are placed when the domain is unbounded.
    pub window: (f64, f64),
    pub lower: Evaluator,
    pub target: Evaluator,
    pub upper: Evaluator,
    pub strict_lower: bool,
    pub strict_upper: bool,
}

impl BoundSpec {
    /// Log-spaced grid over the domain clipped to the sampling window.
    pub fn sampling_grid(&self, points: usize) -> Vec<EvalPoint> {
        let (lo, hi) = self.domain.hull();
        let lo = lo.max(self.window.0);
        let hi = hi.min(self.window.1);
        grid::log_spaced(lo, hi, points).expect("catalog windows are positive")
    }

    /// Signed margins `(target − lower, upper − target)` at one argument.
    pub fn margins(&self, arg: Arg) -> (f64, f64) {
        let t = (self.target)(arg);
        ((t - (self.lower)(arg)), ((self.upper)(arg) - t))
    }

    fn satisfied(&self, (lower, upper): (f64, f64)) -> bool {
        let side = |m: f64, strict: bool| if strict { m > 0.0 } else { m >= 0.0 };
        side(lower, self.strict_lower) && side(upper, self.strict_upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: &'static str,
    pub anchor: &'static str,
    pub passed: bool,
    /// min over samples of min(target − lower, upper − target).
    pub worst_margin: f64,
    pub worst_at: Option<Arg>,
    pub samples: usize,
    pub skipped: usize,
    /// Samples violating the inequality.
    pub failures: usize,
    /// Samples where lower ≥ upper, i.e. the bound itself is empty.
    pub vacuous: usize,
}

/// Checks every entry at the grid points (or pairs of them) inside its
/// domain. Points outside the domain, and pairs closer than
/// [`PAIR_EXCLUSION`], are skipped and counted.
pub fn verify_bounds(catalog: &[BoundSpec], grid: &[EvalPoint]) -> Vec<BoundReport> {
    catalog.iter().map(|spec| verify_one(spec, grid)).collect()
}

/// Checks every entry on its own [`BoundSpec::sampling_grid`].
pub fn verify_catalog(catalog: &[BoundSpec], points: usize) -> Vec<BoundReport> {
    catalog
        .iter()
        .map(|spec| verify_one(spec, &spec.sampling_grid(points)))
        .collect()
}

fn verify_one(spec: &BoundSpec, grid: &[EvalPoint]) -> BoundReport {
    let xs: Vec<f64> = grid.iter().map(|p| p.get()).collect();
    let mut args = Vec::new();
    let mut skipped = 0;
    match spec.arity {
        Arity::Point => {
            for &x in &xs {
                if spec.domain.contains(x) {
                    args.push(Arg::Point(x));
                } else {
                    skipped += 1;
                }
            }
        }
        Arity::Pair => {
            for (i, &x) in xs.iter().enumerate() {
                for &y in &xs[i + 1..] {
                    let inside = spec.domain.contains(x) && spec.domain.contains(y);
                    if inside && (x - y).abs() >= PAIR_EXCLUSION {
                        args.push(Arg::Pair(x, y));
                    } else {
                        skipped += 1;
                    }
                }
            }
        }
    }
    let mut report = BoundReport {
        name: spec.name,
        anchor: spec.anchor,
        passed: !args.is_empty(),
        worst_margin: f64::INFINITY,
        worst_at: None,
        samples: args.len(),
        skipped,
        failures: 0,
        vacuous: 0,
    };
    for arg in args {
        let m = spec.margins(arg);
        if (spec.lower)(arg) >= (spec.upper)(arg) {
            report.vacuous += 1;
        }
        if !spec.satisfied(m) || m.0.is_nan() || m.1.is_nan() {
            report.failures += 1;
        }
        let worst = m.0.min(m.1);
        if worst < report.worst_margin || report.worst_at.is_none() {
            report.worst_margin = worst;
            report.worst_at = Some(arg);
        }
    }
    report.passed &= report.failures == 0 && report.vacuous == 0;
    report
}

pub const CSV_HEADER: &str = "name,samples,skipped,failures,worst_margin,worst_x,worst_y,verdict";

/// One CSV row per report, in catalog order.
pub fn write_csv_rows(reports: &[BoundReport], out: &mut String) {
    for r in reports {
        let (wx, wy) = match r.worst_at {
            Some(a) => (
                format!("{:.16e}", a.first()),
                a.second().map(|y| format!("{y:.16e}")).unwrap_or_default(),
            ),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{:.16e},{},{},{}",
            r.name,
            r.samples,
            r.skipped,
            r.failures,
            r.worst_margin,
            wx,
            wy,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
}

fn x_of(a: Arg) -> f64 {
    a.first()
}

fn none_below(_: Arg) -> f64 {
    f64::NEG_INFINITY
}

fn none_above(_: Arg) -> f64 {
    f64::INFINITY
}

fn ln_minus_psi_target(a: Arg) -> f64 {
    log_minus_psi(x_of(a))
}

fn ln_gamma_target(a: Arg) -> f64 {
    ln_gamma(x_of(a))
}

// ln[x^{x−c}/e^{x−1}]
fn ln_power_bound(x: f64, c: f64) -> f64 {
    (x - c) * x.ln() - (x - 1.0)
}

// ln[x^{x−θ₁(x)}/e^x]
fn ln_shape_base(x: f64) -> f64 {
    (x - theta1_raw(x)) * x.ln() - x
}

// ln of {x^{θ₁(x)}Γ(x) / (y^{θ₁(y)}Γ(y))}^{1/(x−y)}
fn ln_identric_comparison(a: Arg) -> f64 {
    let Arg::Pair(x, y) = a else { return f64::NAN };
    let part = |t: f64| theta1_raw(t) * t.ln() + ln_gamma(t);
    (part(x) - part(y)) / (x - y)
}

fn ln_identric_target(a: Arg) -> f64 {
    let Arg::Pair(x, y) = a else { return f64::NAN };
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    (hi * hi.ln() - lo * lo.ln()) / (hi - lo) - 1.0
}

/// The ten inequalities checked by the `bounds` command.
pub fn catalog() -> Vec<BoundSpec> {
    let positive = Domain(vec![Interval::open(0.0, f64::INFINITY)]);
    let unit = Domain(vec![Interval::left_open(0.0, 1.0)]);
    let beyond_one = Domain(vec![Interval::right_open(1.0, f64::INFINITY)]);
    vec![
        BoundSpec {
            name: "log_minus_digamma",
            anchor: "1/(2x) < ln x - psi(x) < 1/x",
            domain: positive.clone(),
            arity: Arity::Point,
            window: DEFAULT_WINDOW,
            lower: |a| 0.5 / x_of(a),
            target: ln_minus_psi_target,
            upper: |a| 1.0 / x_of(a),
            strict_lower: true,
            strict_upper: true,
        },
        BoundSpec {
            name: "gamma_power_sandwich",
            anchor: "x^(x-gamma)/e^(x-1) < Gamma(x) < x^(x-1/2)/e^(x-1) on x > 1; \
                     on 0 < x < 1 both are lower bounds",
            domain: Domain(vec![Interval::open(0.0, 1.0), Interval::open(1.0, f64::INFINITY)]),
            arity: Arity::Point,
            window: DEFAULT_WINDOW,
            lower: |a| {
                let x = x_of(a);
                let left = ln_power_bound(x, EULER_GAMMA);
                if x < 1.0 {
                    left.max(ln_power_bound(x, 0.5))
                } else {
                    left
                }
            },
            target: ln_gamma_target,
            upper: |a| {
                let x = x_of(a);
                if x > 1.0 {
                    ln_power_bound(x, 0.5)
                } else {
                    f64::INFINITY
                }
            },
            strict_lower: true,
            strict_upper: true,
        },
        BoundSpec {
            name: "gamma_shape_unit_interval",
            anchor: "x^(x-theta(x))/e^x < Gamma(x) <= x^(x-theta(x))/e^(x-1) on (0, 1]",
            domain: unit.clone(),
            arity: Arity::Point,
            window: DEFAULT_WINDOW,
            lower: |a| ln_shape_base(x_of(a)),
            target: ln_gamma_target,
            upper: |a| ln_shape_base(x_of(a)) + 1.0,
            strict_lower: true,
            strict_upper: false,
        },
        BoundSpec {
            name: "gamma_shape_beyond_one",
            anchor: "sqrt(2pi) x^(x-theta(x))/e^x < Gamma(x) <= x^(x-theta(x))/e^(x-1) on [1, inf)",
            domain: beyond_one.clone(),
            arity: Arity::Point,
            window: DEFAULT_WINDOW,
            lower: |a| HALF_LN_2PI + ln_shape_base(x_of(a)),
            target: ln_gamma_target,
            upper: |a| ln_shape_base(x_of(a)) + 1.0,
            strict_lower: true,
            strict_upper: false,
        },
        BoundSpec {
            name: "identric_mean_beyond_one",
            anchor: "I(x,y) < {x^theta(x) Gamma(x) / (y^theta(y) Gamma(y))}^(1/(x-y)) for x, y >= 1",
            domain: beyond_one,
            arity: Arity::Pair,
            window: DEFAULT_WINDOW,
            lower: none_below,
            target: ln_identric_target,
            upper: ln_identric_comparison,
            strict_lower: true,
            strict_upper: true,
        },
        BoundSpec {
            name: "identric_mean_unit_interval",
            anchor: "the previous inequality reversed for x, y in (0, 1]",
            domain: unit,
            arity: Arity::Pair,
            window: DEFAULT_WINDOW,
            lower: ln_identric_comparison,
            target: ln_identric_target,
            upper: none_above,
            strict_lower: true,
            strict_upper: true,
        },
        BoundSpec {
            name: "shifted_digamma_minus_log",
            anchor: "1/(2x) - 1/(12x^2) < psi(x+1) - ln x < 1/(2x)",
            domain: positive.clone(),
            arity: Arity::Point,
            window: DEFAULT_WINDOW,
            lower: |a| {
                let x = x_of(a);
                0.5 / x - 1.0 / (12.0 * x * x)
            },
            // ψ(x+1) − ln x = 1/x − [ln x − ψ(x)]
            target: |a| {
                let x = x_of(a);
                1.0 / x - log_minus_psi(x)
            },
            upper: |a| 0.5 / x_of(a),
            strict_lower: true,
            strict_upper: true,
        },
        BoundSpec {
            name: "shifted_trigamma",
            anchor: "1/(2x^2) - 1/(6x^3) < 1/x - psi'(x+1) < 1/(2x^2) - 1/(6x^3) + 1/(30x^5)",
            domain: positive.clone(),
            arity: Arity::Point,
            // beyond 1e2 the upper margin (≈ 1/(42x⁷)) is below binary64 resolution
            window: (1e-3, 1e2),
            lower: |a| {
                let x = x_of(a);
                0.5 / (x * x) - 1.0 / (6.0 * x * x * x)
            },
            target: |a| {
                let x = x_of(a);
                1.0 / x - polygamma_raw(1, x + 1.0)
            },
            upper: |a| {
                let x = x_of(a);
                0.5 / (x * x) - 1.0 / (6.0 * x * x * x) + 1.0 / (30.0 * x.powi(5))
            },
            strict_lower: true,
            strict_upper: true,
        },
        BoundSpec {
            name: "digamma_log_sandwich",
            anchor: "ln x - 1/x <= psi(x) <= ln x - 1/(2x)",
            domain: positive.clone(),
            arity: Arity::Point,
            window: DEFAULT_WINDOW,
            lower: |a| {
                let x = x_of(a);
                x.ln() - 1.0 / x
            },
            target: |a| polygamma_raw(0, x_of(a)),
            upper: |a| {
                let x = x_of(a);
                x.ln() - 0.5 / x
            },
            strict_lower: false,
            strict_upper: false,
        },
        BoundSpec {
            name: "log_minus_digamma_refined",
            anchor: "1/(2x) < ln x - psi(x) < 1/(2x) + 1/(12x^2)",
            domain: positive,
            arity: Arity::Point,
            window: DEFAULT_WINDOW,
            lower: |a| 0.5 / x_of(a),
            target: ln_minus_psi_target,
            upper: |a| {
                let x = x_of(a);
                0.5 / x + 1.0 / (12.0 * x * x)
            },
            strict_lower: true,
            strict_upper: true,
        },
    ]
}
