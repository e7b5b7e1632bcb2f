//! Independent oracles shared by the integration tests. None of them call
//! into the library.

#![allow(dead_code)]

/// Direct Gauss series with Kahan summation, run far past any stopping rule.
pub fn hyp_oracle(a: f64, b: f64, c: f64, x: f64) -> f64 {
    let (mut sum, mut comp, mut term) = (1.0f64, 0.0f64, 1.0f64);
    for n in 0..200_000 {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * x;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if n > 200 && term.abs() < 1e-20 * sum.abs() {
            break;
        }
    }
    sum
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Complete elliptic integral of the first kind by Simpson quadrature of
/// `1 / sqrt(1 - k^2 sin^2 t)` on `[0, pi/2]`.
pub fn ellip_k_quadrature(k: f64) -> f64 {
    simpson(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 20_000)
}

/// Height term `(e^{1/a} - e^{1/b})^2 + (e^a - e^b)^2` with each difference
/// formed as `e^x expm1(y - x)`, which avoids cancellation for close
/// arguments.
pub fn height_term_oracle(a: f64, b: f64) -> f64 {
    let d = |x: f64, y: f64| x.exp() * (y - x).exp_m1();
    d(1.0 / a, 1.0 / b).powi(2) + d(a, b).powi(2)
}

/// Classical doubly periodic Scherk surface `e^z cos y = cos x`, written as
/// the height `ln(cos x / cos y)` over the points where the ratio is
/// positive. The square-lattice quarter built by the library satisfies
/// `4 z = ln(cos 4x / cos 4y)`.
pub fn scherk_height(x: f64, y: f64) -> f64 {
    (x.cos() / y.cos()).ln()
}
