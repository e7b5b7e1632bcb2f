//! Gauss-Jacobi and Gauss-Legendre rules with a process-wide cache, plus an
//! adaptive complex line integrator built on them.

use crate::specfun::ln_gamma;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights on `[-1, 1]` for the weight `(1 - x)^alpha (1 + x)^beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    /// Quadrature nodes in increasing order.
    pub nodes: Vec<f64>,
    /// Positive weights matching `nodes`.
    pub weights: Vec<f64>,
}

type RuleKey = (usize, i64, i64);

fn cache() -> &'static Mutex<HashMap<RuleKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn quantize(v: f64) -> i64 {
    (v * 1e9).round() as i64
}

/// Recurrence coefficients `(a_k, b_k)` of the monic Jacobi polynomials;
/// `b_0` holds the total mass of the weight.
fn jacobi_recurrence(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    a[0] = (beta - alpha) / (ab + 2.0);
    b[0] = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0).unwrap()
        + ln_gamma(beta + 1.0).unwrap()
        - ln_gamma(ab + 2.0).unwrap())
    .exp();
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        a[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
        b[k] = if k == 1 {
            // The factor (1 + alpha + beta) cancels analytically.
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
    }
    (a, b)
}

/// Orthonormal polynomial values `p_0..p_n` at `x` and the derivative of `p_n`.
fn orthonormal(x: f64, a: &[f64], b: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut p = vec![0.0; n + 1];
    let mut dp = vec![0.0; n + 1];
    p[0] = 1.0 / b[0].sqrt();
    let (mut pm, mut dpm) = (0.0, 0.0);
    for k in 0..n {
        let sb_next = if k + 1 < n { b[k + 1].sqrt() } else { b_last(a, b, n) };
        let sb = if k == 0 { 0.0 } else { b[k].sqrt() };
        let next = ((x - a[k]) * p[k] - sb * pm) / sb_next;
        let dnext = (p[k] + (x - a[k]) * dp[k] - sb * dpm) / sb_next;
        pm = p[k];
        dpm = dp[k];
        p[k + 1] = next;
        dp[k + 1] = dnext;
    }
    let d = dp[n];
    (p, d)
}

/// Any positive normalisation works for the last step, since only the zeros
/// of `p_n` are used.
fn b_last(_a: &[f64], _b: &[f64], _n: usize) -> f64 {
    1.0
}

fn build_rule(n: usize, alpha: f64, beta: f64) -> GaussRule {
    let (a, b) = jacobi_recurrence(n, alpha, beta);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = a[k];
        if k + 1 < n {
            let off = b[k + 1].sqrt();
            j[(k, k + 1)] = off;
            j[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        // Newton polish on p_n, then Christoffel weights from the orthonormal sums.
        for _ in 0..3 {
            let (p, d) = orthonormal(*x, &a, &b, n);
            if d != 0.0 {
                let step = p[n] / d;
                if step.is_finite() && step.abs() < 1e-6 {
                    *x -= step;
                }
            }
        }
        let (p, _) = orthonormal(*x, &a, &b, n);
        let s: f64 = p[..n].iter().map(|v| v * v).sum();
        weights.push(1.0 / s);
    }
    GaussRule { nodes, weights }
}

/// Gauss-Jacobi rule with `n` nodes for the weight `(1 - x)^alpha (1 + x)^beta`.
///
/// Rules are built once by the Golub-Welsch eigenvalue method and cached for
/// the lifetime of the process.
///
/// # Panics
/// Panics if `n == 0` or an exponent is not greater than `-1`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Arc<GaussRule> {
    assert!(n > 0, "rule needs at least one node");
    assert!(alpha > -1.0 && beta > -1.0, "Jacobi exponents must exceed -1");
    let key = (n, quantize(alpha), quantize(beta));
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return rule.clone();
    }
    let rule = Arc::new(build_rule(n, alpha, beta));
    cache().lock().unwrap().insert(key, rule.clone());
    rule
}

/// Gauss-Legendre rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Integrate a complex function along the straight segment `[z0, z1]` with
/// `n`-point Gauss-Legendre.
pub fn segment_legendre<F>(f: &F, z0: Complex64, z1: Complex64, n: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let rule = gauss_legendre(n);
    let half = 0.5 * (z1 - z0);
    let mid = 0.5 * (z1 + z0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += f(mid + half * *x) * *w;
    }
    acc * half
}

/// Adaptive Gauss-Legendre integration of a complex function over a real
/// parameter interval, bisecting until the 16- and 32-point rules agree to
/// `tol` (relative to `scale` when positive, absolute otherwise).
pub fn adaptive_legendre<F>(f: &F, a: f64, b: f64, tol: f64, scale: f64, depth: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let g = |z: Complex64| f(z.re);
    let za = Complex64::new(a, 0.0);
    let zb = Complex64::new(b, 0.0);
    let coarse = segment_legendre(&g, za, zb, 16);
    let fine = segment_legendre(&g, za, zb, 32);
    let target = if scale > 0.0 { tol * scale } else { tol };
    if (fine - coarse).norm() <= target || depth == 0 {
        return fine;
    }
    let m = 0.5 * (a + b);
    adaptive_legendre(f, a, m, tol, scale, depth - 1) + adaptive_legendre(f, m, b, tol, scale, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(10);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_weight_mass_and_moments() {
        // integral of (1-x)^(-1/2) (1+x)^(1/2) over [-1,1] is pi; first moment is pi/2.
        let r = gauss_jacobi(20, -0.5, 0.5);
        let m0: f64 = r.weights.iter().sum();
        let m1: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x).sum();
        assert!((m0 - std::f64::consts::PI).abs() < 1e-13);
        assert!((m1 - std::f64::consts::FRAC_PI_2).abs() < 1e-13, "{m1}");
    }

    #[test]
    fn jacobi_alpha_beta_sum_minus_one() {
        // alpha + beta = -1 exercises the cancelled first recurrence coefficient.
        let r = gauss_jacobi(12, -0.25, -0.75);
        let m0: f64 = r.weights.iter().sum();
        // B(1/4 + ... ) : 2^0 Gamma(3/4) Gamma(1/4) / Gamma(1) = pi sqrt(2)
        assert!((m0 - std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-12, "{m0}");
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(2)).sum();
        assert!(s.is_finite());
    }
}
