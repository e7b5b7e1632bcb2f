//! Extremal lengths of curve families on conformal polygons.
//!
//! Every family used here reduces to arcs joining two boundary intervals of
//! the upper half-plane, whose extremal length is a function of the cross
//! ratio of the four endpoints. It is evaluated with complete elliptic
//! integrals through the arithmetic-geometric mean.

use crate::error::{Error, Result};
use crate::scmap::{ConformalPolygon, Cycle, CycleKind};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A cycle together with the flag marking the symmetric composite
/// `c_i + c_{2g+1-i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveFamily {
    /// Underlying cycle.
    pub cycle: Cycle,
    /// True for the union of the cycle and its mirror image.
    pub composite: bool,
}

impl CurveFamily {
    /// Family of arcs joining two edges.
    pub fn connecting(from_edge: usize, to_edge: usize) -> Self {
        Self { cycle: Cycle::connecting(from_edge, to_edge), composite: false }
    }

    /// Family of loops around one edge.
    pub fn encircling(edge: usize) -> Self {
        Self { cycle: Cycle::encircling(edge), composite: false }
    }

    /// Union of the loops around `edge` and around its mirror edge.
    pub fn composite(edge: usize) -> Self {
        Self { cycle: Cycle::encircling(edge), composite: true }
    }
}

/// Arithmetic-geometric mean of two non-negative numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a.abs() {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind `K(k)` given the complementary
/// modulus `k' = sqrt(1 - k^2)` (accurate for `k` close to 1).
pub fn ellip_k_from_complement(kp: f64) -> f64 {
    PI / (2.0 * agm(1.0, kp))
}

/// Complete elliptic integral of the first kind `K(k)`.
pub fn ellip_k(k: f64) -> f64 {
    ellip_k_from_complement(((1.0 - k) * (1.0 + k)).sqrt())
}

/// Extremal length of arcs joining `[a, b]` and `[c, d]` in the upper
/// half-plane, given the cross ratio `m = (b-a)(d-c) / ((c-a)(d-b))` and
/// its complement `1 - m = (c-b)(d-a) / ((c-a)(d-b))` computed separately.
pub fn ext_from_cross_ratio(m: f64, one_minus_m: f64) -> Result<f64> {
    if !(m > 0.0) || !(one_minus_m > 0.0) {
        return Err(Error::Degenerate(format!("cross ratio {m} outside (0, 1)")));
    }
    let s = m.sqrt();
    // k = (1 - s) / (1 + s) with 1 - s = (1 - m) / (1 + s).
    let k = one_minus_m / ((1.0 + s) * (1.0 + s));
    let kp = 2.0 * s.sqrt() / (1.0 + s);
    // 2 K(k) / K(k') = 2 agm(1, k) / agm(1, k').
    Ok(2.0 * agm(1.0, k) / agm(1.0, kp))
}

/// Extremal length of arcs joining `[a, b]` and `[c, d]` for finite
/// `a < b < c < d`.
pub fn ext_four_points(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    if !(a < b && b < c && c < d) {
        return Err(Error::Degenerate("marked points not strictly increasing".into()));
    }
    let den = (c - a) * (d - b);
    ext_from_cross_ratio((b - a) * (d - c) / den, (c - b) * (d - a) / den)
}

/// Extremal length of the connecting family between two non-adjacent edges.
/// Edge `n` is the edge from minus infinity, edge `n - 1` runs to plus infinity.
pub fn ext_connecting(poly: &ConformalPolygon, f: &CurveFamily) -> Result<f64> {
    let (i, j) = match f.cycle.kind {
        CycleKind::Connecting { from_edge, to_edge } => (from_edge, to_edge),
        CycleKind::Encircling { .. } => {
            return Err(Error::NotSupported("ext_connecting needs a connecting family".into()))
        }
    };
    connecting_edges(poly, i, j)
}

fn connecting_edges(poly: &ConformalPolygon, i: usize, j: usize) -> Result<f64> {
    let n = poly.len();
    let left_inf = i == n;
    let right_inf = j == n - 1;
    let lo = if left_inf { 0 } else { i + 1 };
    if j >= n || i > n || (!left_inf && j < i + 2) || (left_inf && right_inf) {
        return Err(Error::Degenerate(format!("edges {i} and {j} are adjacent or invalid")));
    }
    // Points a <= b = t_lo, c = t_j <= d with a = -inf or d = +inf allowed.
    let (m, om) = match (left_inf, right_inf) {
        (true, false) => {
            let dc = poly.gap(j);
            let db = poly.diff(j + 1, lo);
            (dc / db, poly.diff(j, lo) / db)
        }
        (false, true) => {
            let ba = poly.gap(i);
            let ca = poly.diff(j, i);
            (ba / ca, poly.diff(j, lo) / ca)
        }
        _ => {
            let den = poly.diff(j, i) * poly.diff(j + 1, lo);
            (
                poly.gap(i) * poly.gap(j) / den,
                poly.diff(j, lo) * poly.diff(j + 1, i) / den,
            )
        }
    };
    ext_from_cross_ratio(m, om)
}

/// Extremal length of the loops around a finite edge on the double of the
/// polygon: twice the extremal length of the arcs joining its two neighbours.
pub fn ext_encircling(poly: &ConformalPolygon, f: &CurveFamily) -> Result<f64> {
    let k = match f.cycle.kind {
        CycleKind::Encircling { edge } => edge,
        CycleKind::Connecting { .. } => {
            return Err(Error::NotSupported("ext_encircling needs an encircling family".into()))
        }
    };
    let n = poly.len();
    if k + 1 >= n {
        return Err(Error::Degenerate(format!("edge {k} is not finite")));
    }
    if poly.gap(k) == 0.0 {
        return Err(Error::Degenerate(format!("edge {k} has zero length")));
    }
    let left = if k == 0 { n } else { k - 1 };
    Ok(2.0 * connecting_edges(poly, left, k + 1)?)
}

/// Extremal length of the symmetric composite family: half the value of a
/// single constituent, after checking that the mirror constituent agrees.
pub fn ext_composite(poly: &ConformalPolygon, f: &CurveFamily) -> Result<f64> {
    let k = match f.cycle.kind {
        CycleKind::Encircling { edge } => edge,
        CycleKind::Connecting { .. } => {
            return Err(Error::NotSupported("composite families are built from encircling cycles".into()))
        }
    };
    let n = poly.len();
    if k + 2 > n {
        return Err(Error::Degenerate(format!("edge {k} is not finite")));
    }
    let mirror = n - 2 - k;
    let e1 = ext_encircling(poly, &CurveFamily::encircling(k))?;
    let e2 = ext_encircling(poly, &CurveFamily::encircling(mirror))?;
    if (e1 - e2).abs() > 1e-6 * e1 {
        return Err(Error::NotSupported(format!(
            "composite family on an asymmetric configuration ({e1} vs {e2})"
        )));
    }
    Ok(0.5 * e1)
}

/// Dispatch on the family type.
pub fn ext_family(poly: &ConformalPolygon, f: &CurveFamily) -> Result<f64> {
    match (f.composite, f.cycle.kind) {
        (true, _) => ext_composite(poly, f),
        (false, CycleKind::Encircling { .. }) => ext_encircling(poly, f),
        (false, CycleKind::Connecting { .. }) => ext_connecting(poly, f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scmap::VertexLabel;

    fn poly(pts: &[f64]) -> ConformalPolygon {
        let ex = vec![-1; pts.len()];
        ConformalPolygon::with_forced_infinity(pts, &ex, vec![VertexLabel::Free; pts.len()])
    }

    #[test]
    fn symmetric_square_has_unit_modulus() {
        // Cross ratio 1/2 corresponds to the square.
        let e = ext_from_cross_ratio(0.5, 0.5).unwrap();
        assert!((e - 1.0).abs() < 1e-14, "{e}");
    }

    #[test]
    fn rectangle_sides_from_quadrature() {
        // The SC map with four -1 exponents develops onto a rectangle; its
        // aspect ratio is the connecting extremal length.
        let k = 0.5f64;
        let p = poly(&[-1.0 / k, -1.0, 1.0, 1.0 / k]);
        let width = p.edge_period(1).unwrap().norm();
        let height = p.edge_period(2).unwrap().norm();
        let e = ext_connecting(&p, &CurveFamily::connecting(0, 2)).unwrap();
        assert!((e - width / height).abs() < 1e-10 * e, "{e} vs {}", width / height);
        let a = ext_encircling(&p, &CurveFamily::encircling(1)).unwrap();
        assert!((a - 2.0 * e).abs() < 1e-14);
    }

    #[test]
    fn adjacent_edges_rejected() {
        let p = poly(&[-1.0, 0.0, 1.0]);
        assert!(ext_connecting(&p, &CurveFamily::connecting(0, 1)).is_err());
    }

    #[test]
    fn infinite_edges_match_moebius_image() {
        // Arcs joining (-inf, -1) and (1, 2) versus a finite Moebius image.
        let p = poly(&[-1.0, 0.0, 1.0, 2.0]);
        let e = ext_connecting(&p, &CurveFamily::connecting(4, 2)).unwrap();
        // t -> -1/(t - 3) maps -inf, -1, 1, 2 to 0, 1/4, 1/2, 1.
        let f = ext_four_points(0.0, 0.25, 0.5, 1.0).unwrap();
        assert!((e - f).abs() < 1e-13);
        let g = ext_connecting(&p, &CurveFamily::connecting(0, 3)).unwrap();
        // t -> -1/(t - 3): -1, 0, 2, +inf to 1/4, 1/3, 1, 0 -> reorder via t -> -1/(t+3).
        let h = ext_four_points(-1.0 / 2.0, -1.0 / 3.0, -1.0 / 5.0, 0.0).unwrap();
        assert!((g - h).abs() < 1e-13, "{g} vs {h}");
    }
}
