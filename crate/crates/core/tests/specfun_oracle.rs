//! Special functions checked against independent oracles: a shifted Stirling
//! series for Gamma and a compensated direct sum for the Gauss series.

use orthoscherk::specfun::{gamma, hyp2f1, ln_gamma, HypergeometricParams};
use proptest::prelude::*;

/// Gamma via upward recursion to `x + 30` and the Stirling series there.
fn gamma_oracle(x: f64) -> f64 {
    const SHIFT: usize = 30;
    // B_{2k} / (2k (2k - 1)) for k = 1..8.
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
    ];
    let z = x + SHIFT as f64;
    let mut series = 0.0;
    let mut zp = z;
    for c in C {
        series += c / zp;
        zp *= z * z;
    }
    let ln = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series;
    let mut prod = 1.0;
    for k in 0..SHIFT {
        prod *= x + k as f64;
    }
    ln.exp() / prod
}

/// Direct Gauss series with Kahan summation, run far past the stopping rule.
fn hyp_oracle(a: f64, b: f64, c: f64, x: f64) -> f64 {
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

#[test]
fn gamma_matches_stirling_oracle() {
    for i in 1..=60 {
        let x = 0.05 * i as f64 + 0.013;
        let (v, o) = (gamma(x).unwrap(), gamma_oracle(x));
        assert!(((v - o) / o).abs() < 1e-13, "x={x}: {v} vs {o}");
    }
    for &x in &[7.3, 12.5, 25.0, 60.2] {
        let (v, o) = (gamma(x).unwrap(), gamma_oracle(x));
        assert!(((v - o) / o).abs() < 1e-13, "x={x}: {v} vs {o}");
        assert!((ln_gamma(x).unwrap() - o.ln()).abs() < 1e-12 * o.ln().abs());
    }
}

#[test]
fn gamma_quarter_ratio() {
    let ratio = gamma(1.25).unwrap() / gamma(1.75).unwrap();
    let oracle = gamma_oracle(1.25) / gamma_oracle(1.75);
    assert!(((ratio - oracle) / oracle).abs() < 1e-13);
    // Frozen oracle value.
    assert!((ratio - 0.9862250397295463).abs() < 1e-13, "{ratio:.16}");
}

#[test]
fn gamma_recursion_identity() {
    for &x in &[0.1, 0.5, 1.25, 3.7] {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        assert!(((lhs - rhs) / rhs).abs() < 1e-12);
    }
}

#[test]
fn hyp2f1_matches_series_oracle_on_grid() {
    let xs = [0.0, 0.1, 0.25, 0.4, 0.5, 0.64, 0.7, 0.81, 0.9, 0.95];
    for &(a, b, c) in &[(0.25, 1.0, 1.75), (0.75, 1.0, 1.25)] {
        for &x in &xs {
            let v = hyp2f1(HypergeometricParams::new(a, b, c, x)).unwrap();
            let o = hyp_oracle(a, b, c, x);
            assert!(((v - o) / o).abs() < 1e-12, "({a},{b},{c},{x}): {v} vs {o}");
        }
    }
}

#[test]
fn hyp2f1_frozen_examples() {
    let v = hyp2f1(HypergeometricParams::new(0.25, 1.0, 1.75, 0.25)).unwrap();
    assert!((v - hyp_oracle(0.25, 1.0, 1.75, 0.25)).abs() < 1e-14);
    let w = hyp2f1(HypergeometricParams::new(0.75, 1.0, 1.25, 0.81)).unwrap();
    assert!(((w - hyp_oracle(0.75, 1.0, 1.25, 0.81)) / w).abs() < 1e-12);
}

proptest! {
    #[test]
    fn hyp2f1_is_one_at_origin(a in 0.01f64..3.0, b in 0.01f64..3.0, c in 0.01f64..3.0) {
        prop_assert_eq!(hyp2f1(HypergeometricParams::new(a, b, c, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn hyp2f1_increasing(a in 0.05f64..2.0, b in 0.05f64..2.0, c in 0.3f64..3.0, x in 0.0f64..0.97) {
        let h = 0.02;
        let lo = hyp2f1(HypergeometricParams::new(a, b, c, x)).unwrap();
        let hi = hyp2f1(HypergeometricParams::new(a, b, c, x + h)).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn gamma_recursion_holds(x in 0.05f64..20.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
    }
}
