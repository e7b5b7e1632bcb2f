//! Schwarz-Christoffel maps, staircase fits and extremal lengths: path
//! independence, developed edge geometry, the monodromy identity, conformal
//! invariance and monotonicity of moduli, and elliptic-integral oracles.

mod common;

use num_complex::Complex64;
use orthoscherk::extlen::ext_four_points;
use orthoscherk::genus1::{self, degeneration_ext, Domain};
use orthoscherk::height_solver::monodromy_defect;
use orthoscherk::orthodisk::*;
use orthoscherk::scmap::{cycle_period, eval_sc, Cycle, VertexLabel};
use proptest::prelude::*;

fn label_position(st: &Staircase, label: VertexLabel) -> [f64; 2] {
    st.vertices.iter().find(|v| v.label == label).and_then(|v| v.position).unwrap()
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

#[test]
fn half_plane_modulus_matches_quadrature() {
    // The inverse sine amplitude maps the half-plane to the rectangle
    // [-K, K] x [0, K'] with [-1/k, -1] and [1, 1/k] onto the vertical sides,
    // so the family joining them has extremal length 2 K(k) / K(k').
    let k: f64 = 0.5;
    let kp = (1.0 - k * k).sqrt();
    let expected = 2.0 * common::ellip_k_quadrature(k) / common::ellip_k_quadrature(kp);
    let got = ext_four_points(-1.0 / k, -1.0, 1.0, 1.0 / k).unwrap();
    assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
}

#[test]
fn collapsing_gap_gives_logarithmic_modulus() {
    let hs = [1e-2, 1e-3, 1e-4, 1e-5];
    let inv: Vec<f64> = hs.iter().map(|h| 1.0 / degeneration_ext(Domain::Gdh, *h).unwrap()).collect();
    let logs: Vec<f64> = hs.iter().map(|h: &f64| -h.ln()).collect();
    let n = hs.len() as f64;
    let (mx, my) = (logs.iter().sum::<f64>() / n, inv.iter().sum::<f64>() / n);
    let sxy: f64 = logs.iter().zip(&inv).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let pi_inv = 1.0 / std::f64::consts::PI;
    assert!((slope - pi_inv).abs() < 0.1 * pi_inv, "slope {slope} vs 1/pi");
}

#[test]
fn degenerate_side_is_longer() {
    for h in [1e-2, 1e-3, 1e-4] {
        let eps = genus1::degeneration_epsilon(Domain::Gdh, h).unwrap();
        let hg = genus1::degeneration_gap(Domain::GinvDh, eps).unwrap();
        assert!(degeneration_ext(Domain::Gdh, h).unwrap() < degeneration_ext(Domain::GinvDh, hg).unwrap());
    }
}

#[test]
fn genus2_fit_from_unnormalized_edges_round_trips() {
    // Edges 0.3 : 0.7 rescaled to the unit staircase.
    let c = GeometricCoords::new(2, vec![0.15], 0.5).unwrap();
    let pair = build_pair(&c).unwrap();
    for d in [Domain::Gdh, Domain::GinvDh] {
        let f = fit_prevertices(&pair, d).unwrap();
        assert!(roundtrip_error(&pair, &f).unwrap() < 1e-8);
        let dev = f.develop().unwrap();
        let lengths: Vec<f64> = dev.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        for (l, t) in lengths.iter().zip(c.all_edges().iter().chain(c.all_edges().iter().rev())) {
            assert!((l - t).abs() < 1e-10, "{l} vs {t}");
        }
    }
}

#[test]
fn labels_pair_up_by_reversal() {
    for g in 1..=4 {
        let edges: Vec<f64> = (0..g - 1).map(|j| 0.5 / (g as f64 + 1.0) * (1.0 + 0.1 * j as f64)).collect();
        let c = GeometricCoords::new(g, edges, 0.9).unwrap();
        let pair = build_pair(&c).unwrap();
        let partner = |j: usize| 2 * g - j;
        for j in 0..=2 * g {
            assert_eq!(partner(partner(j)), j);
            let a = label_position(&pair.gdh, VertexLabel::P(j));
            let b = label_position(&pair.ginvdh, VertexLabel::P(partner(j)));
            assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15, "g={g} j={j}");
        }
        assert!(conjugacy_residual(&pair) <= 1e-12);
    }
}

#[test]
fn conjugacy_residual_sees_a_perturbed_edge() {
    let c = GeometricCoords::new(2, vec![0.2], 0.7).unwrap();
    let mut pair = build_pair(&c).unwrap();
    let st = pair.domain_mut(Domain::GinvDh);
    let k = st.vertices.iter().position(|v| v.label == VertexLabel::P(2)).unwrap();
    for v in &mut st.vertices[k..] {
        if let (Some(p), VertexLabel::P(_)) = (v.position.as_mut(), v.label) {
            p[0] += 1e-3;
        }
    }
    let r = conjugacy_residual(&pair);
    assert!((r - 1e-3).abs() < 1e-9, "{r}");
}

#[test]
fn genus2_parity_flips_between_domains() {
    let a = vertex_exponents(2, Domain::Gdh);
    let b = vertex_exponents(2, Domain::GinvDh);
    for j in 1..=5 {
        assert_eq!(a.finite[j], -b.finite[j]);
    }
    for ex in [a, b] {
        assert_eq!(ex.at_infinity, -4 - ex.finite.iter().sum::<i32>());
    }
}

#[test]
fn completeness_paths_shrink_gaps() {
    for path in genus2_boundary_paths(0.18, 0.54).unwrap() {
        let mut last: Vec<f64> = vec![f64::INFINITY; path.collapsing.len()];
        for c in &path.points {
            let pair = build_pair(c).unwrap();
            for (k, (d, i)) in path.collapsing.iter().enumerate() {
                let w = fit_prevertices(&pair, *d).unwrap().half_gaps()[*i];
                assert!(w < last[k], "{} at {:?}", path.stratum, c.to_vec());
                last[k] = w;
            }
        }
    }
}

fn genus_polygon(g: usize, domain: Domain, w: &[f64]) -> orthoscherk::ConformalPolygon {
    let s: f64 = w.iter().sum();
    let half: Vec<f64> = w.iter().map(|x| x / s).collect();
    polygon_from_half_gaps(g, domain, &half)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integral_is_path_independent(r in 0.1f64..0.9, x in -3.0f64..3.0, y in 0.1f64..3.0, mx in -3.0f64..3.0, my in 0.1f64..3.0) {
        let p = genus1::polygon(Domain::Gdh, r).unwrap();
        let base = Complex64::new(0.0, 1.0);
        let (z, mid) = (Complex64::new(x, y), Complex64::new(mx, my));
        let direct = eval_sc(&p, z, base).unwrap();
        let split = eval_sc(&p, mid, base).unwrap() + eval_sc(&p, z, mid).unwrap();
        prop_assert!((direct - split).norm() <= 1e-10 * (1.0 + direct.norm()));
    }

    #[test]
    fn developed_edges_alternate(l1 in 0.02f64..0.48, extra in 0.01f64..0.6, dom in 0usize..2) {
        let c = GeometricCoords::new(2, vec![l1], l1 + extra).unwrap();
        let d = if dom == 0 { Domain::Gdh } else { Domain::GinvDh };
        let f = fit_prevertices(&build_pair(&c).unwrap(), d).unwrap();
        let w = f.develop().unwrap();
        let e: Vec<Complex64> = w.windows(2).map(|p| (p[1] - p[0]) / (p[1] - p[0]).norm()).collect();
        for k in 0..e.len() - 1 {
            prop_assert!((e[k].re * e[k + 1].re + e[k].im * e[k + 1].im).abs() < 1e-9);
        }
        for k in 0..e.len() - 2 {
            prop_assert!(cross(e[k], e[k + 2]).abs() < 1e-9);
        }
    }

    #[test]
    fn monodromy_identity_holds(w0 in 0.05f64..1.0, w1 in 0.05f64..1.0, w2 in 0.05f64..1.0, dom in 0usize..2) {
        let d = if dom == 0 { Domain::Gdh } else { Domain::GinvDh };
        let g1 = genus_polygon(1, d, &[w0, w1]);
        prop_assert!(monodromy_defect(&g1, 1, 1).unwrap() <= 1e-6);
        prop_assert!(monodromy_defect(&g1, 1, 0).unwrap() == 0.0);
        let g2 = genus_polygon(2, d, &[w0, w1, w2]);
        prop_assert!(monodromy_defect(&g2, 2, 1).unwrap() <= 1e-6);
    }

    #[test]
    fn encircling_period_matches_edge(w0 in 0.05f64..1.0, w1 in 0.05f64..1.0, edge in 1usize..3) {
        let p = genus_polygon(1, Domain::Gdh, &[w0, w1]);
        let c = cycle_period(&p, Cycle::encircling(edge)).unwrap();
        let e = p.edge_period(edge).unwrap();
        prop_assert!((c.norm() - e.norm()).abs() <= 1e-9 * e.norm());
    }

    #[test]
    fn modulus_is_moebius_invariant(a in -5.0f64..5.0, gaps in prop::array::uniform3(0.01f64..3.0), s in 0.1f64..10.0, shift in -5.0f64..5.0, pole in 0.5f64..20.0) {
        let p = [a, a + gaps[0], a + gaps[0] + gaps[1], a + gaps[0] + gaps[1] + gaps[2]];
        let base = ext_four_points(p[0], p[1], p[2], p[3]).unwrap();
        let affine: Vec<f64> = p.iter().map(|t| s * t + shift).collect();
        let e1 = ext_four_points(affine[0], affine[1], affine[2], affine[3]).unwrap();
        // t -> -1 / (t - q) with the pole q left of every point keeps the order.
        let q = p[0] - pole;
        let inv: Vec<f64> = p.iter().map(|t| -1.0 / (t - q)).collect();
        let e2 = ext_four_points(inv[0], inv[1], inv[2], inv[3]).unwrap();
        prop_assert!((e1 - base).abs() <= 1e-8 * base);
        prop_assert!((e2 - base).abs() <= 1e-8 * base);
    }

    #[test]
    fn enlarging_the_arcs_shortens_the_family(gaps in prop::array::uniform3(0.05f64..3.0), grow in 0.01f64..2.0) {
        let p = [0.0, gaps[0], gaps[0] + gaps[1], gaps[0] + gaps[1] + gaps[2]];
        let inner = ext_four_points(p[0], p[1], p[2], p[3]).unwrap();
        let outer = ext_four_points(p[0] - grow, p[1], p[2], p[3] + grow).unwrap();
        prop_assert!(outer < inner);
    }

    #[test]
    fn fitted_prevertices_are_symmetric(l1 in 0.02f64..0.48, extra in 0.01f64..0.6) {
        let c = GeometricCoords::new(2, vec![l1], l1 + extra).unwrap();
        let pair = build_pair(&c).unwrap();
        for d in [Domain::Gdh, Domain::GinvDh] {
            let t = fit_prevertices(&pair, d).unwrap().polygon.prevertices();
            for i in 0..t.len() {
                prop_assert!((t[i] + t[t.len() - 1 - i]).abs() < 1e-9);
            }
        }
    }
}
