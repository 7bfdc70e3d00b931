//! Batch front end: configuration, the five commands and their CSV output.
//!
//! Exit codes: 0 success or expected outcome, 1 mismatch or failed check,
//! 2 configuration error, 3 numerical failure.

use std::fmt::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::certify::{self, bounds, certify_cm, CMReport, Verdict};
use crate::grid;
use crate::kernels::{laplace_integral, KernelError, KernelId, QuadratureConfig};
use crate::specfun::{log_minus_psi, polygamma_raw, EvalPoint, K_MAX};
use crate::theta::{gamma_shape, theta1_raw, theta_raw};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// ψ, θ_α, θ₁ by quadrature and the gamma-shape function on the grid
    Eval,
    /// Residuals of the recurrence and integral representations
    Identities,
    /// The inequality catalog
    Bounds,
    /// Complete-monotonicity sweeps of θ_α, one per alpha
    Certify,
    /// Values near the ends of the axis
    Limits,
}

/// Command-line flags. Every setting is optional so that flag values can be
/// layered over a config file and the defaults.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "thetacm", version, about = "Digamma-family numerics and CM certification")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long, allow_negative_numbers = true)]
    pub grid_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub grid_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Log spacing (default); `--log=false` for linear
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log: Option<bool>,
    /// Exponent α; repeat for several
    #[arg(long = "alpha", allow_negative_numbers = true)]
    pub alphas: Vec<f64>,
    /// Maximum difference order for certify
    #[arg(long)]
    pub order: Option<usize>,
    /// Comma-separated difference steps for certify
    #[arg(long, value_delimiter = ',')]
    pub steps: Vec<f64>,
    /// Residual tolerance for identities
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub max_subdivisions: Option<usize>,
    /// CSV destination (standard output when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value file; flags take precedence over it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid {field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            min: 1e-3,
            max: 1e3,
            points: 60,
            log: true,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<EvalPoint> {
        let g = if self.log {
            grid::log_spaced(self.min, self.max, self.points)
        } else {
            grid::linear(self.min, self.max, self.points)
        };
        g.expect("validated grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub grid: GridSpec,
    /// Whether any grid setting came from a flag or the file.
    pub grid_explicit: bool,
    pub alphas: Vec<f64>,
    pub order: usize,
    pub steps: Vec<f64>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub quadrature: QuadratureConfig,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            grid: GridSpec::default(),
            grid_explicit: false,
            alphas: vec![1.0],
            order: certify::DEFAULT_MAX_ORDER,
            steps: certify::DEFAULT_STEPS.to_vec(),
            tol: DEFAULT_TOL,
            out: None,
            quadrature: QuadratureConfig::default(),
        }
    }

    /// Defaults, then `file` (key=value text), then `args`.
    pub fn from_sources(args: &Args, file: Option<&str>) -> Result<Self, ConfigError> {
        let mut layered = Args::default();
        if let Some(text) = file {
            layered = parse_config_file(text)?;
        }
        overlay(&mut layered, args);
        let command = layered
            .command
            .ok_or_else(|| ConfigError::new("command", "no command given"))?;
        let mut cfg = RunConfig::new(command);
        let g = &mut cfg.grid;
        cfg.grid_explicit = layered.grid_min.is_some()
            || layered.grid_max.is_some()
            || layered.points.is_some()
            || layered.log.is_some();
        if let Some(v) = layered.grid_min {
            g.min = v;
        }
        if let Some(v) = layered.grid_max {
            g.max = v;
        }
        if let Some(v) = layered.points {
            g.points = v;
        }
        if let Some(v) = layered.log {
            g.log = v;
        }
        if !layered.alphas.is_empty() {
            cfg.alphas = layered.alphas;
        }
        if let Some(v) = layered.order {
            cfg.order = v;
        }
        if !layered.steps.is_empty() {
            cfg.steps = layered.steps;
        }
        if let Some(v) = layered.tol {
            cfg.tol = v;
        }
        if let Some(v) = layered.abs_tol {
            cfg.quadrature.abs_tol = v;
        }
        if let Some(v) = layered.rel_tol {
            cfg.quadrature.rel_tol = v;
        }
        if let Some(v) = layered.max_subdivisions {
            cfg.quadrature.max_subdivisions = v;
        }
        cfg.out = layered.out;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if !(g.min > 0.0 && g.min.is_finite()) {
            return Err(ConfigError::new("grid.min", format!("must be positive and finite, got {}", g.min)));
        }
        if !g.max.is_finite() || g.max < g.min {
            return Err(ConfigError::new("grid.max", format!("must be finite and at least grid.min, got {}", g.max)));
        }
        match g.points {
            0 => return Err(ConfigError::new("grid.points", "must be at least 1")),
            1 if g.max != g.min => {
                return Err(ConfigError::new("grid.points", "a single point needs grid.min == grid.max"))
            }
            p if p >= 2 && g.max == g.min => {
                return Err(ConfigError::new("grid.max", "must exceed grid.min when points >= 2"))
            }
            _ => {}
        }
        if self.alphas.is_empty() {
            return Err(ConfigError::new("alpha", "at least one value is required"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !a.is_finite()) {
            return Err(ConfigError::new("alpha", format!("must be finite, got {a}")));
        }
        if self.order > certify::MAX_ORDER {
            return Err(ConfigError::new("order", format!("must be at most {}, got {}", certify::MAX_ORDER, self.order)));
        }
        if self.steps.is_empty() {
            return Err(ConfigError::new("steps", "at least one step is required"));
        }
        if let Some(h) = self.steps.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(ConfigError::new("steps", format!("must be positive, got {h}")));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(ConfigError::new("tol", format!("must be positive, got {}", self.tol)));
        }
        let q = &self.quadrature;
        if !(q.abs_tol > 0.0 && q.abs_tol.is_finite()) {
            return Err(ConfigError::new("quadrature.abs_tol", format!("must be positive, got {}", q.abs_tol)));
        }
        if !(q.rel_tol > 0.0 && q.rel_tol.is_finite()) {
            return Err(ConfigError::new("quadrature.rel_tol", format!("must be positive, got {}", q.rel_tol)));
        }
        if q.max_subdivisions == 0 {
            return Err(ConfigError::new("quadrature.max_subdivisions", "must be at least 1"));
        }
        q.validate()
            .map_err(|e| ConfigError::new("quadrature", e.to_string()))
    }
}

fn overlay(base: &mut Args, top: &Args) {
    macro_rules! take {
        ($($f:ident),*) => {$(if top.$f.is_some() { base.$f = top.$f.clone(); })*};
    }
    take!(command, grid_min, grid_max, points, log, order, tol, abs_tol, rel_tol, max_subdivisions, out, config);
    if !top.alphas.is_empty() {
        base.alphas = top.alphas.clone();
    }
    if !top.steps.is_empty() {
        base.steps = top.steps.clone();
    }
}

/// Parses `key = value` lines; `#` starts a comment.
///
/// Keys: command, grid.min, grid.max, grid.points, grid.log, alpha (comma
/// list), order, steps (comma list), tol, out, quadrature.abs_tol,
/// quadrature.rel_tol, quadrature.max_subdivisions.
pub fn parse_config_file(text: &str) -> Result<Args, ConfigError> {
    fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
        v.parse()
            .map_err(|_| ConfigError::new(key, format!("cannot parse {v:?}")))
    }
    fn list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
        v.split(',').map(|s| num(key, s.trim())).collect()
    }
    let mut args = Args::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError::new("config", format!("line {}: expected key = value", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "command" => {
                args.command = Some(
                    Command::from_str(value, true)
                        .map_err(|_| ConfigError::new(key, format!("unknown command {value:?}")))?,
                )
            }
            "grid.min" => args.grid_min = Some(num(key, value)?),
            "grid.max" => args.grid_max = Some(num(key, value)?),
            "grid.points" => args.points = Some(num(key, value)?),
            "grid.log" => args.log = Some(num(key, value)?),
            "alpha" => args.alphas = list(key, value)?,
            "order" => args.order = Some(num(key, value)?),
            "steps" => args.steps = list(key, value)?,
            "tol" => args.tol = Some(num(key, value)?),
            "out" => args.out = Some(PathBuf::from(value)),
            "quadrature.abs_tol" => args.abs_tol = Some(num(key, value)?),
            "quadrature.rel_tol" => args.rel_tol = Some(num(key, value)?),
            "quadrature.max_subdivisions" => args.max_subdivisions = Some(num(key, value)?),
            other => return Err(ConfigError::new(other, "unknown key")),
        }
    }
    Ok(args)
}

/// Result of one command: CSV for the output file, a human summary for
/// standard error and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub csv: String,
    pub summary: String,
    pub code: i32,
}

impl Outcome {
    fn numerical(err: KernelError) -> Self {
        Outcome {
            csv: String::new(),
            summary: format!("error: {err}\n"),
            code: EXIT_NUMERICAL,
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Outcome {
    match cfg.command {
        Command::Eval => cmd_eval(cfg),
        Command::Identities => cmd_identities(cfg),
        Command::Bounds => cmd_bounds(cfg),
        Command::Certify => cmd_certify(cfg),
        Command::Limits => cmd_limits(cfg),
    }
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn theta_label(alpha: f64) -> String {
    format!("theta[{alpha}]")
}

pub fn cmd_eval(cfg: &RunConfig) -> Outcome {
    let grid = cfg.grid.points();
    let rows: Result<Vec<String>, KernelError> = grid
        .par_iter()
        .map(|&x| {
            let xv = x.get();
            let mut row = format!("{},{}", f(xv), f(polygamma_raw(0, xv)));
            for &alpha in &cfg.alphas {
                let _ = write!(row, ",{}", f(theta_raw(alpha, xv)));
            }
            let kernel = crate::kernels::theta1_via_kernel(x, &cfg.quadrature)?;
            let _ = write!(row, ",{},{}", f(kernel), f(gamma_shape(x)));
            Ok(row)
        })
        .collect();
    let rows = match rows {
        Ok(r) => r,
        Err(e) => return Outcome::numerical(e),
    };
    let mut csv = String::from("x,psi");
    for &alpha in &cfg.alphas {
        let _ = write!(csv, ",{}", theta_label(alpha));
    }
    csv.push_str(",theta1_kernel,gamma_shape\n");
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    Outcome {
        summary: format!("eval: {} rows\n", grid.len()),
        csv,
        code: EXIT_OK,
    }
}

/// One identity check at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRow {
    pub identity: String,
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Magnitude of the largest term combined on either side.
    pub scale: f64,
}

impl IdentityRow {
    /// `|lhs − rhs| / max(1, scale)`.
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.scale.max(1.0)
    }
}

/// Every identity evaluated at `x`, in a fixed order.
pub fn identity_rows(x: EvalPoint, q: &QuadratureConfig) -> Result<Vec<IdentityRow>, KernelError> {
    let xv = x.get();
    let mut rows = Vec::new();
    let mut push_scaled = |identity: String, lhs: f64, rhs: f64, scale: f64| {
        rows.push(IdentityRow { identity, x: xv, lhs, rhs, scale })
    };
    for i in 1..=3usize {
        let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        let step = sign * crate::specfun::factorial(i - 1) / xv.powi(i as i32);
        let at_x = polygamma_raw(i - 1, xv);
        // near 0 both terms on the right are large and cancel
        push_scaled(
            format!("recurrence[{i}]"),
            polygamma_raw(i - 1, xv + 1.0),
            at_x + step,
            at_x.abs(),
        );
    }
    let mut push = |identity: String, lhs: f64, rhs: f64| push_scaled(identity, lhs, rhs, rhs.abs());
    let log_ratio = KernelId::log_ratio(1.0, std::f64::consts::E).expect("valid kernel");
    push("log_ratio[1,e]".into(), laplace_integral(log_ratio, x, q)?, 1.0);
    for i in 1..=3usize.min(K_MAX) {
        let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        let kernel = KernelId::polygamma(i).expect("valid order");
        push(
            format!("polygamma_kernel[{i}]"),
            laplace_integral(kernel, x, q)?,
            sign * polygamma_raw(i, xv),
        );
    }
    let l = log_minus_psi(xv);
    push("binet".into(), laplace_integral(KernelId::BinetH, x, q)?, 1.0 / xv - l);
    push("rho".into(), laplace_integral(KernelId::Rho, x, q)?, l);
    let t1 = theta1_raw(xv);
    push(
        "theta1_rho_prime".into(),
        0.5 + laplace_integral(KernelId::RhoPrime, x, q)?,
        t1,
    );
    push(
        "theta1_h_prime".into(),
        0.5 - laplace_integral(KernelId::BinetHPrime, x, q)?,
        t1,
    );
    Ok(rows)
}

pub fn cmd_identities(cfg: &RunConfig) -> Outcome {
    let grid = cfg.grid.points();
    let rows: Result<Vec<Vec<IdentityRow>>, KernelError> = grid
        .par_iter()
        .map(|&x| identity_rows(x, &cfg.quadrature))
        .collect();
    let rows: Vec<IdentityRow> = match rows {
        Ok(r) => r.into_iter().flatten().collect(),
        Err(e) => return Outcome::numerical(e),
    };
    let mut csv = String::from("identity,x,lhs,rhs,residual\n");
    let mut worst: Option<&IdentityRow> = None;
    let mut failures = 0;
    for r in &rows {
        let res = r.residual();
        let _ = writeln!(csv, "{},{},{},{},{}", r.identity, f(r.x), f(r.lhs), f(r.rhs), f(res));
        // NaN residuals count as failures
        if !(res <= cfg.tol) {
            failures += 1;
        }
        if worst.is_none_or(|w| res > w.residual()) {
            worst = Some(r);
        }
    }
    let mut summary = format!("identities: {} rows, {} above tol {:e}\n", rows.len(), failures, cfg.tol);
    if let Some(w) = worst {
        let _ = writeln!(summary, "worst residual {:e}: {} at x = {}", w.residual(), w.identity, w.x);
    }
    Outcome {
        csv,
        summary,
        code: if failures == 0 { EXIT_OK } else { EXIT_MISMATCH },
    }
}

pub fn cmd_bounds(cfg: &RunConfig) -> Outcome {
    let catalog = bounds::catalog();
    let reports = if cfg.grid_explicit {
        bounds::verify_bounds(&catalog, &cfg.grid.points())
    } else {
        bounds::verify_catalog(&catalog, bounds::DEFAULT_POINTS)
    };
    let mut csv = format!("{}\n", bounds::CSV_HEADER);
    bounds::write_csv_rows(&reports, &mut csv);
    let mut summary = String::new();
    for r in &reports {
        let _ = writeln!(
            summary,
            "{:<28} {}  worst margin {:e}  ({} samples, {} skipped)",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.worst_margin,
            r.samples,
            r.skipped
        );
    }
    let all = reports.iter().all(|r| r.passed);
    Outcome {
        csv,
        summary,
        code: if all { EXIT_OK } else { EXIT_MISMATCH },
    }
}

/// θ_α is completely monotonic exactly when α ≤ 1.
pub fn expected_verdict(alpha: f64) -> Verdict {
    if alpha <= 1.0 {
        Verdict::ConsistentCm
    } else {
        Verdict::Violation
    }
}

pub fn certify_reports(cfg: &RunConfig) -> Vec<CMReport> {
    let grid = cfg.grid.points();
    cfg.alphas
        .iter()
        .map(|&alpha| {
            certify_cm(
                &theta_label(alpha),
                |x| theta_raw(alpha, x),
                &grid,
                cfg.order,
                &cfg.steps,
            )
            .expect("validated configuration")
        })
        .collect()
}

pub fn cmd_certify(cfg: &RunConfig) -> Outcome {
    let reports = certify_reports(cfg);
    let mut csv = format!("{}\n", certify::CSV_HEADER);
    let mut summary = String::new();
    let mut mismatches = 0;
    for (report, &alpha) in reports.iter().zip(&cfg.alphas) {
        report.write_csv_rows(&mut csv);
        let expected = expected_verdict(alpha);
        if report.verdict != expected {
            mismatches += 1;
        }
        let _ = write!(
            summary,
            "{}: {} (expected {}), min signed {:e}, {} witnesses, {} excluded",
            report.function_id,
            report.verdict,
            expected,
            report.min_signed,
            report.witnesses.len(),
            report.excluded
        );
        if let Some(w) = report.witnesses.first() {
            let _ = write!(summary, "; first n={} h={} x={} value={:e}", w.n, w.h, w.x, w.value);
        }
        summary.push('\n');
    }
    Outcome {
        csv,
        summary,
        code: if mismatches == 0 { EXIT_OK } else { EXIT_MISMATCH },
    }
}

pub fn cmd_limits(cfg: &RunConfig) -> Outcome {
    let mut csv = String::from("quantity,x,value,limit\n");
    let mut row = |q: &str, x: f64, v: f64, limit: &str| {
        let _ = writeln!(csv, "{q},{},{},{limit}", f(x), f(v));
    };
    for x in [1e-8, 1e-4] {
        row("theta1", x, theta1_raw(x), "1");
    }
    for x in [1e4, 1e6] {
        row("theta1-1/2-1/(12x)", x, theta1_raw(x) - 0.5 - 1.0 / (12.0 * x), "0");
    }
    for &alpha in &cfg.alphas {
        let label = theta_label(alpha);
        let (at_zero, at_inf) = if alpha < 1.0 { ("inf", "0") } else if alpha == 1.0 { ("1", "1/2") } else { ("0", "inf") };
        row(&label, 1e-12, theta_raw(alpha, 1e-12), at_zero);
        row(&label, 1e12, theta_raw(alpha, 1e12), at_inf);
    }
    let p = |x: f64| EvalPoint::new(x).expect("positive literal");
    row("gamma_shape", 1e-6, gamma_shape(p(1e-6)), "1");
    row("gamma_shape", 1.0, gamma_shape(p(1.0)), "e");
    row("gamma_shape", 1e4, gamma_shape(p(1e4)), "sqrt(2pi)");
    Outcome {
        summary: "limits: report only\n".into(),
        csv,
        code: EXIT_OK,
    }
}
