//! Real special functions: the Gamma function and the Gauss hypergeometric
//! function on `[0, 1)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Lanczos coefficients for `g = 7`, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos sum and shifted argument for `Gamma(x)` with `x >= 0.5`.
fn lanczos_parts(x: f64) -> (f64, f64) {
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    (sum, z + LANCZOS_G + 0.5)
}

/// Gamma function for `x >= 0.5`, without domain checks.
fn gamma_lanczos(x: f64) -> f64 {
    let (sum, w) = lanczos_parts(x);
    // Split the power so that w^(x - 1/2) does not overflow before exp(-w) damps it.
    let half = w.powf(0.5 * (x - 0.5));
    (2.0 * PI).sqrt() * half * (-w).exp() * half * sum
}

/// Gamma function on the positive real axis.
///
/// Arguments below `1/2` are shifted up with `Gamma(x) = Gamma(x + 1) / x`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x == x.round() && x <= 171.0 {
        // Exact factorial for integer arguments.
        return Ok((1..x as u32).fold(1.0, |acc, k| acc * k as f64));
    }
    if x < 0.5 {
        return Ok(gamma_lanczos(x + 1.0) / x);
    }
    Ok(gamma_lanczos(x))
}

/// Natural logarithm of the Gamma function on the positive real axis.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let (sum, w) = lanczos_parts(x);
    Ok(0.5 * (2.0 * PI).ln() + (x - 0.5) * w.ln() - w + sum.ln())
}

/// Reciprocal Gamma function on the whole real line (zero at the poles).
pub fn rgamma(x: f64) -> f64 {
    if x > 0.0 {
        return 1.0 / gamma(x).unwrap_or(f64::INFINITY);
    }
    if x == x.round() {
        return 0.0;
    }
    // Reflection: 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi.
    (PI * x).sin() * gamma_lanczos(1.0 - x) / PI
}

/// Gamma function on the real line away from the non-positive integers.
fn gamma_real(x: f64) -> Result<f64> {
    if x > 0.0 {
        return gamma(x);
    }
    if x == x.round() {
        return Err(Error::Domain(format!("gamma has a pole at {x}")));
    }
    Ok(PI / ((PI * x).sin() * gamma_lanczos(1.0 - x)))
}

/// Parameters of `2F1(a, b; c; x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricParams {
    /// First numerator parameter.
    pub a: f64,
    /// Second numerator parameter.
    pub b: f64,
    /// Denominator parameter, positive.
    pub c: f64,
    /// Argument in `[0, 1)`.
    pub x: f64,
}

impl HypergeometricParams {
    /// Bundle the four arguments.
    pub fn new(a: f64, b: f64, c: f64, x: f64) -> Self {
        Self { a, b, c, x }
    }
}

/// Argument above which the `1 - x` transformation is used.
const TRANSFORM_THRESHOLD: f64 = 0.8;

/// Direct Gauss series with the relative stopping rule `|term| < 1e-16 |sum|`.
fn gauss_series(a: f64, b: f64, c: f64, x: f64, max_terms: usize) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..max_terms {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * x;
        sum += term;
        if term == 0.0 || term.abs() < 1e-16 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Domain(format!(
        "hypergeometric series did not converge in {max_terms} terms at x = {x}"
    )))
}

/// Gauss hypergeometric function `2F1(a, b; c; x)` for `x` in `[0, 1)`.
///
/// For `x > 0.8` the connection formula to argument `1 - x` is used when
/// `c - a - b` is not an integer; otherwise the direct series is summed with
/// an extended term budget.
pub fn hyp2f1(p: HypergeometricParams) -> Result<f64> {
    let HypergeometricParams { a, b, c, x } = p;
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("hyp2f1 requires 0 <= x < 1, got {x}")));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("hyp2f1 parameter pole: c = {c}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let s = c - a - b;
    let integer_gap = (s - s.round()).abs() < 1e-12;
    if x <= TRANSFORM_THRESHOLD || integer_gap {
        return gauss_series(a, b, c, x, 2_000_000);
    }
    let y = 1.0 - x;
    let gc = gamma(c)?;
    let first = gc * gamma_real(s)? * rgamma(c - a) * rgamma(c - b);
    let second = gc * gamma_real(-s)? * rgamma(a) * rgamma(b);
    let mut value = 0.0;
    if first != 0.0 {
        value += first * gauss_series(a, b, 1.0 - s, y, 10_000)?;
    }
    if second != 0.0 {
        value += second * y.powf(s) * gauss_series(c - a, c - b, 1.0 + s, y, 10_000)?;
    }
    Ok(value)
}
