//! Real-argument log-gamma, digamma and polygamma functions.
//!
//! Everything here is evaluated in binary64 from first principles:
//! upward recurrence to `x >= RECURRENCE_SHIFT`, then a fixed ten-term
//! asymptotic series built from [`BERNOULLI`]. Near `x = 1` and `x = 2`
//! the log-gamma function switches to its Taylor series so that the exact
//! zeros `ln Γ(1) = ln Γ(2) = 0` come out exactly.

use std::sync::LazyLock;

use thiserror::Error;

/// Largest polygamma order supported by [`polygamma`].
pub const K_MAX: usize = 12;

/// Euler–Mascheroni constant γ (audited literal, 36 digits).
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;

/// Arguments below this are shifted upward by the recurrence before the
/// asymptotic series is applied.
pub const RECURRENCE_SHIFT: f64 = 16.0;

pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_405_617_6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("abscissa must be finite and strictly positive, got {0}")]
    Domain(f64),
    #[error("derivative order {0} exceeds the supported maximum {K_MAX}")]
    OrderOutOfRange(usize),
}

/// A strictly positive, finite abscissa.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EvalPoint(f64);

impl EvalPoint {
    pub fn new(x: f64) -> Result<Self, SpecfunError> {
        if x.is_finite() && x > 0.0 {
            Ok(Self(x))
        } else {
            Err(SpecfunError::Domain(x))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for EvalPoint {
    type Error = SpecfunError;

    fn try_from(x: f64) -> Result<Self, Self::Error> {
        Self::new(x)
    }
}

/// Derivative order `k` with `0 <= k <= K_MAX`; `k = 0` denotes ψ itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerivOrder(usize);

impl DerivOrder {
    pub fn new(k: usize) -> Result<Self, SpecfunError> {
        if k <= K_MAX {
            Ok(Self(k))
        } else {
            Err(SpecfunError::OrderOutOfRange(k))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

/// Exact Bernoulli numbers B₂, B₄, …, B₂₀ as numerator/denominator pairs.
#[derive(Debug)]
pub struct BernoulliTable {
    pairs: [(i64, i64); 10],
}

/// The table used by every asymptotic series in this crate.
pub const BERNOULLI: BernoulliTable = BernoulliTable {
    pairs: [
        (1, 6),
        (-1, 30),
        (1, 42),
        (-1, 30),
        (5, 66),
        (-691, 2730),
        (7, 6),
        (-3617, 510),
        (43867, 798),
        (-174611, 330),
    ],
};

impl BernoulliTable {
    /// Number of stored even-index Bernoulli numbers.
    pub const fn len(&self) -> usize {
        self.pairs.len()
    }

    pub const fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(numerator, denominator)` of `B_{2k}` for `k = 1..=10`.
    pub fn rational(&self, k: usize) -> Option<(i64, i64)> {
        k.checked_sub(1).and_then(|i| self.pairs.get(i).copied())
    }

    /// `B_{2k}` as a float, `k = 1..=10`.
    pub fn b2k(&self, k: usize) -> f64 {
        let (n, d) = self.rational(k).expect("Bernoulli index out of table range");
        n as f64 / d as f64
    }

    /// Iterator over `(k, B_{2k})`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pairs
            .iter()
            .enumerate()
            .map(|(i, &(n, d))| (i + 1, n as f64 / d as f64))
    }
}

// B_{2k}/(2k), the coefficients of ln z - ψ(z) - 1/(2z) in powers of z^{-2k}.
static LOG_MINUS_DIGAMMA_COEFFS: LazyLock<[f64; 10]> = LazyLock::new(|| {
    let mut c = [0.0; 10];
    for (k, b) in BERNOULLI.iter() {
        c[k - 1] = b / (2 * k) as f64;
    }
    c
});

// B_{2k}/(2k(2k-1)), the Stirling correction coefficients for ln Γ.
static STIRLING_COEFFS: LazyLock<[f64; 10]> = LazyLock::new(|| {
    let mut c = [0.0; 10];
    for (k, b) in BERNOULLI.iter() {
        c[k - 1] = b / ((2 * k) * (2 * k - 1)) as f64;
    }
    c
});

// B_{2k}/(2k)!, used by the Euler–Maclaurin tail of the Hurwitz zeta sum.
static EULER_MACLAURIN_COEFFS: LazyLock<[f64; 10]> = LazyLock::new(|| {
    let mut c = [0.0; 10];
    let mut fact = 1.0;
    let mut m = 0usize;
    for (k, b) in BERNOULLI.iter() {
        while m < 2 * k {
            m += 1;
            fact *= m as f64;
        }
        c[k - 1] = b / fact;
    }
    c
});

/// `B_{2k}/(2k)!` for `k = 1..=10`.
pub(crate) fn bernoulli_over_factorial() -> &'static [f64; 10] {
    &EULER_MACLAURIN_COEFFS
}

const LGAMMA_SERIES_TERMS: usize = 40;

// ζ(k) - 1 for k = 2..LGAMMA_SERIES_TERMS+1, computed once as ζ(k, 2).
static ZETA_MINUS_ONE: LazyLock<[f64; LGAMMA_SERIES_TERMS]> = LazyLock::new(|| {
    let mut z = [0.0; LGAMMA_SERIES_TERMS];
    for (i, slot) in z.iter_mut().enumerate() {
        *slot = hurwitz_zeta(i as u32 + 2, 2.0);
    }
    z
});

/// Evaluates `sum_{k} c[k] * w^{k+1}` by Horner's rule (lowest power first in `c`).
#[inline]
fn horner_tail(c: &[f64], w: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| (acc + ck) * w)
}

/// Hurwitz zeta ζ(s, q) = Σ_{n≥0} (q+n)^{-s} for integer s ≥ 2 and q > 0.
pub(crate) fn hurwitz_zeta(s: u32, q: f64) -> f64 {
    debug_assert!(s >= 2 && q > 0.0);
    let shift = if q < RECURRENCE_SHIFT {
        (RECURRENCE_SHIFT - q).ceil() as usize
    } else {
        0
    };
    let z = q + shift as f64;
    let sf = s as f64;
    let zs = z.powi(-(s as i32));
    let inv_z = 1.0 / z;
    let inv_z2 = inv_z * inv_z;

    // Euler–Maclaurin: z^{1-s}/(s-1) + z^{-s}/2 + Σ B_{2k}/(2k)! (s)_{2k-1} z^{-s-2k+1}
    let mut tail = 0.0;
    let mut rising = sf; // (s)_{2k-1}
    let mut zpow = zs * inv_z; // z^{-s-2k+1}
    for (k, &c) in EULER_MACLAURIN_COEFFS.iter().enumerate() {
        if k > 0 {
            let m = 2 * k as u32;
            rising *= (sf + m as f64 - 1.0) * (sf + m as f64);
            zpow *= inv_z2;
        }
        tail += c * rising * zpow;
    }
    let mut sum = zs * z / (sf - 1.0) + 0.5 * zs + tail;
    for j in (0..shift).rev() {
        sum += (q + j as f64).powi(-(s as i32));
    }
    sum
}

/// ln Γ(x) for real x > 0.
pub fn lgamma(x: EvalPoint) -> f64 {
    ln_gamma(x.get())
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        ln_gamma_one_plus(x) - x.ln()
    } else if x < 1.5 {
        ln_gamma_one_plus(x - 1.0)
    } else if x < 2.5 {
        ln_gamma_two_plus(x - 2.0)
    } else if x < RECURRENCE_SHIFT {
        // ln Γ(x) = ln[(x-1)(x-2)…(x-m)] + ln Γ(x-m) with x - m in [1.5, 2.5)
        let m = (x - 1.5).floor() as usize;
        let mut prod = 1.0;
        for j in 1..=m {
            prod *= x - j as f64;
        }
        ln_gamma_two_plus(x - m as f64 - 2.0) + prod.ln()
    } else {
        stirling(x)
    }
}

/// `ln Γ(x) − (x − 1/2) ln x + x − ln √(2π)`, the Stirling remainder,
/// without the cancellation of the naive difference for large x.
pub(crate) fn ln_gamma_stirling_remainder(x: f64) -> f64 {
    if x >= RECURRENCE_SHIFT {
        horner_tail(&STIRLING_COEFFS[..], 1.0 / (x * x)) * x
    } else {
        ln_gamma(x) - (x - 0.5) * x.ln() + x - HALF_LN_2PI
    }
}

fn stirling(z: f64) -> f64 {
    let inv = 1.0 / z;
    let corr = horner_tail(&STIRLING_COEFFS[..], inv * inv) * z;
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + corr
}

// ln Γ(2+z) = (1-γ)z + Σ_{k≥2} (-1)^k (ζ(k)-1) z^k / k, |z| ≤ 1/2.
fn ln_gamma_two_plus(z: f64) -> f64 {
    let zeta = &*ZETA_MINUS_ONE;
    let mut acc = 0.0;
    for (i, &zm1) in zeta.iter().enumerate().rev() {
        let k = (i + 2) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * z + sign * zm1 / k;
    }
    z * ((1.0 - EULER_GAMMA) + z * acc)
}

// ln Γ(1+z) = ln Γ(2+z) - ln(1+z).
fn ln_gamma_one_plus(z: f64) -> f64 {
    ln_gamma_two_plus(z) - z.ln_1p()
}

/// ψ(x) = Γ'(x)/Γ(x) for real x > 0.
///
/// The argument is shifted to `x + n >= 16` with ψ(x) = ψ(x+n) - Σ 1/(x+j)
/// and the ten-term asymptotic series is applied at the shifted point.
pub fn digamma(x: EvalPoint) -> f64 {
    psi(x.get())
}

pub(crate) fn psi(x: f64) -> f64 {
    if (x - DIGAMMA_ROOT_HI).abs() < ROOT_EXPANSION_RADIUS {
        return psi_near_root(x);
    }
    let (z, recip) = shift_up(x);
    z.ln() - log_minus_digamma_asymptotic(z) - recip
}

// Positive zero of ψ split into a double and its residual.
const DIGAMMA_ROOT_HI: f64 = 1.461_632_144_968_362_2;
const DIGAMMA_ROOT_LO: f64 = 9.549_995_429_965_697e-17;
const ROOT_EXPANSION_RADIUS: f64 = 0.25;
const ROOT_TAYLOR_TERMS: usize = 24;

// ψ^(k)(x₀)/k! for k = 1..=ROOT_TAYLOR_TERMS.
static ROOT_TAYLOR: LazyLock<[f64; ROOT_TAYLOR_TERMS]> = LazyLock::new(|| {
    let mut c = [0.0; ROOT_TAYLOR_TERMS];
    for (i, slot) in c.iter_mut().enumerate() {
        let k = i + 1;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        *slot = sign * hurwitz_zeta(k as u32 + 1, DIGAMMA_ROOT_HI);
    }
    c
});

// Taylor series about the root keeps the relative error bounded where ψ → 0.
fn psi_near_root(x: f64) -> f64 {
    let d = (x - DIGAMMA_ROOT_HI) - DIGAMMA_ROOT_LO;
    horner_tail(&ROOT_TAYLOR[..], d)
}

// Returns (x + n, Σ_{j<n} 1/(x+j)) with the smallest n making x + n ≥ RECURRENCE_SHIFT.
fn shift_up(x: f64) -> (f64, f64) {
    if x >= RECURRENCE_SHIFT {
        return (x, 0.0);
    }
    let n = (RECURRENCE_SHIFT - x).ceil() as usize;
    let mut recip = 0.0;
    for j in (0..n).rev() {
        recip += 1.0 / (x + j as f64);
    }
    (x + n as f64, recip)
}

// ln z - ψ(z) for z ≥ RECURRENCE_SHIFT, cancellation-free.
fn log_minus_digamma_asymptotic(z: f64) -> f64 {
    let inv = 1.0 / z;
    0.5 * inv + horner_tail(&LOG_MINUS_DIGAMMA_COEFFS[..], inv * inv)
}

/// ln x − ψ(x), evaluated without the cancellation of the naive difference.
///
/// For large x both logarithm and digamma are close to `ln x`; the
/// asymptotic series gives the difference directly.
pub fn log_minus_digamma(x: EvalPoint) -> f64 {
    log_minus_psi(x.get())
}

pub(crate) fn log_minus_psi(x: f64) -> f64 {
    if x >= RECURRENCE_SHIFT {
        return log_minus_digamma_asymptotic(x);
    }
    let (z, recip) = shift_up(x);
    let n = z - x;
    // ln x - ψ(x) = [ln z - ψ(z)] - ln(z/x) + Σ 1/(x+j)
    log_minus_digamma_asymptotic(z) - (n / x).ln_1p() + recip
}

/// Series part of θ₁(x) − 1/2 = Σ_k B_{2k}/(2k) x^{1-2k}, valid for x ≥ 16.
pub(crate) fn theta1_excess_asymptotic(x: f64) -> f64 {
    debug_assert!(x >= RECURRENCE_SHIFT);
    let inv = 1.0 / x;
    horner_tail(&LOG_MINUS_DIGAMMA_COEFFS[..], inv * inv) * x
}

/// 1/2 + 1/(12x) − θ₁(x) from the series, valid for x ≥ 16.
pub(crate) fn theta1_remainder_asymptotic(x: f64) -> f64 {
    debug_assert!(x >= RECURRENCE_SHIFT);
    let inv = 1.0 / x;
    -horner_tail(&LOG_MINUS_DIGAMMA_COEFFS[1..], inv * inv) * inv
}

/// k-th derivative of ψ, `k = 0..=K_MAX` (k = 0 gives ψ itself).
///
/// Uses ψ⁽ᵏ⁾(x) = (−1)^{k+1} k! ζ(k+1, x).
pub fn polygamma(k: DerivOrder, x: EvalPoint) -> f64 {
    polygamma_raw(k.get(), x.get())
}

pub(crate) fn polygamma_raw(k: usize, x: f64) -> f64 {
    if k == 0 {
        return psi(x);
    }
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * factorial(k) * hurwitz_zeta(k as u32 + 1, x)
}

/// The stored Euler–Mascheroni constant.
pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}

/// Slow reference for ψ: −γ₀ + Σ_{n<terms} (1/(n+1) − 1/(n+x)) plus the
/// first-order tail correction (x−1)/terms.
///
/// The remaining truncation error is O(x²/terms²). Summands are combined
/// as (x−1)/((n+1)(n+x)) and accumulated with Neumaier compensation.
pub fn digamma_series_oracle(x: EvalPoint, terms: u64) -> f64 {
    let x = x.get();
    let terms = terms.max(1);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for n in (0..terms).rev() {
        let nf = n as f64;
        let term = (x - 1.0) / ((nf + 1.0) * (nf + x));
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    -EULER_GAMMA + (sum + comp) + (x - 1.0) / terms as f64
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
