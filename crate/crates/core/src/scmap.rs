//! Schwarz-Christoffel integrands with half-integer exponents on the upper
//! half-plane: evaluation of the map, edge periods, cycle periods on the
//! double cover and analytic continuation of a period along a braid loop.
//!
//! Prevertices are stored as a base point plus consecutive gaps, so that the
//! distance between clustered prevertices is represented exactly even when
//! their absolute positions are not.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Symbolic tag of a prevertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexLabel {
    /// Staircase vertex `P_j`.
    P(usize),
    /// End vertex `E_1` or `E_2`.
    E(u8),
    /// Corner vertex `V`.
    V,
    /// No symbolic meaning.
    Free,
}

/// Upper half-plane with marked real prevertices and integer exponent data.
///
/// The Schwarz-Christoffel integrand is `prod (t - t_i)^(a_i / 2)` and the
/// exponent at infinity satisfies `a_inf = -4 - sum a_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalPolygon {
    origin: f64,
    gaps: Vec<f64>,
    exponents: Vec<i32>,
    exponent_inf: i32,
    labels: Vec<VertexLabel>,
}

/// Which kind of closed curve on the double cover a [`Cycle`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleKind {
    /// Loop around the finite edge with the given index.
    Encircling {
        /// Edge index.
        edge: usize,
    },
    /// Arc joining two non-adjacent edges, closed up on the double.
    Connecting {
        /// Left edge index (use the polygon's `n` for the edge from minus infinity).
        from_edge: usize,
        /// Right edge index.
        to_edge: usize,
    },
}

/// A cycle in the double of a conformal polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    /// Encircling or connecting.
    pub kind: CycleKind,
    /// Reverse the orientation (negates every period).
    pub reversed: bool,
}

impl Cycle {
    /// Positively oriented cycle encircling `edge`.
    pub fn encircling(edge: usize) -> Self {
        Self { kind: CycleKind::Encircling { edge }, reversed: false }
    }

    /// Positively oriented cycle connecting two edges.
    pub fn connecting(from_edge: usize, to_edge: usize) -> Self {
        Self { kind: CycleKind::Connecting { from_edge, to_edge }, reversed: false }
    }

    /// The same cycle with opposite orientation.
    pub fn reverse(self) -> Self {
        Self { reversed: !self.reversed, ..self }
    }
}

/// Argument of `z` on the closed upper half-plane in `[0, pi]`, extended
/// below the real axis with a downward cut, giving values in `(-pi/2, 3pi/2]`.
pub(crate) fn branch_arg(z: Complex64) -> f64 {
    if z.im == 0.0 && z.re < 0.0 {
        return PI;
    }
    let a = z.im.atan2(z.re);
    if a < -0.5 * PI {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Reduce an angle into `(-pi, pi]`.
fn wrap(a: f64) -> f64 {
    let mut r = a % (2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    } else if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// `exp(sum e_i (ln|d_i| + i arg_i))` from log-magnitude and phase sums.
fn from_log(log_mag: f64, phase: f64) -> Complex64 {
    Complex64::from_polar(log_mag.exp(), phase)
}

const BASE_NODES: usize = 48;
const MAX_NODES: usize = 768;
const EDGE_TOL: f64 = 1e-11;

impl ConformalPolygon {
    /// Build from sorted prevertex positions.
    ///
    /// The exponent at infinity is stored as given so that [`Self::validate`]
    /// can report a violated exponent sum.
    pub fn new(prevertices: &[f64], exponents: &[i32], exponent_inf: i32, labels: Vec<VertexLabel>) -> Self {
        let origin = prevertices.first().copied().unwrap_or(0.0);
        let gaps = prevertices.windows(2).map(|w| w[1] - w[0]).collect();
        let labels = if labels.len() == prevertices.len() { labels } else { vec![VertexLabel::Free; prevertices.len()] };
        Self { origin, gaps, exponents: exponents.to_vec(), exponent_inf, labels }
    }

    /// Build from the first prevertex and the consecutive gaps.
    pub fn from_gaps(origin: f64, gaps: Vec<f64>, exponents: &[i32], exponent_inf: i32, labels: Vec<VertexLabel>) -> Self {
        let n = gaps.len() + 1;
        let labels = if labels.len() == n { labels } else { vec![VertexLabel::Free; n] };
        Self { origin, gaps, exponents: exponents.to_vec(), exponent_inf, labels }
    }

    /// Build with the exponent at infinity fixed by the exponent sum.
    pub fn with_forced_infinity(prevertices: &[f64], exponents: &[i32], labels: Vec<VertexLabel>) -> Self {
        let a_inf = -4 - exponents.iter().sum::<i32>();
        Self::new(prevertices, exponents, a_inf, labels)
    }

    /// Number of finite prevertices.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    /// True when there is no finite prevertex.
    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Finite prevertex positions.
    pub fn prevertices(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        if self.is_empty() {
            return out;
        }
        let mut t = self.origin;
        out.push(t);
        for g in &self.gaps {
            t += g;
            out.push(t);
        }
        out
    }

    /// Gap `t_{i+1} - t_i`.
    pub fn gap(&self, i: usize) -> f64 {
        self.gaps[i]
    }

    /// All consecutive gaps.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// First prevertex.
    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Exponents of the finite prevertices.
    pub fn exponents(&self) -> &[i32] {
        &self.exponents
    }

    /// Exponent at infinity.
    pub fn exponent_inf(&self) -> i32 {
        self.exponent_inf
    }

    /// Vertex labels.
    pub fn labels(&self) -> &[VertexLabel] {
        &self.labels
    }

    /// Index of the first prevertex with the given label.
    pub fn index_of(&self, label: VertexLabel) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }

    /// Signed difference `t_j - t_i` summed from gaps.
    pub fn diff(&self, j: usize, i: usize) -> f64 {
        if j >= i {
            self.gaps[i..j].iter().sum()
        } else {
            -self.gaps[j..i].iter().sum::<f64>()
        }
    }

    /// Prevertex `t_i`.
    pub fn position(&self, i: usize) -> f64 {
        self.origin + self.gaps[..i].iter().sum::<f64>()
    }

    /// Number of edges, counting the two unbounded ones (`n + 1`).
    pub fn edge_count(&self) -> usize {
        self.len() + 1
    }

    /// Check the polygon invariants.
    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Validation("no finite prevertex".into()));
        }
        if self.labels.len() != self.len() {
            return Err(Error::Validation("label count differs from prevertex count".into()));
        }
        if let Some(i) = self.gaps.iter().position(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::Validation(format!("prevertices not strictly increasing at index {}", i + 1)));
        }
        if !self.origin.is_finite() {
            return Err(Error::Validation("non-finite prevertex".into()));
        }
        for (i, a) in self.exponents.iter().enumerate() {
            let odd = a.rem_euclid(2) == 1;
            if !((odd && *a >= -1) || *a == -2) {
                return Err(Error::Validation(format!(
                    "exponent {a} at prevertex {i} is neither an odd integer >= -1 nor a simple pole (-2)"
                )));
            }
        }
        if !self.exponents.iter().any(|a| *a > -2) {
            return Err(Error::Validation("no finite vertex (all exponents are poles)".into()));
        }
        let expected = -4 - self.exponents.iter().sum::<i32>();
        if expected != self.exponent_inf {
            return Err(Error::ExponentSum {
                expected,
                found: self.exponent_inf,
                deficit: expected - self.exponent_inf,
            });
        }
        Ok(())
    }

    /// Integrand at a complex point, with the branch argument in `[0, pi]` on
    /// the closed upper half-plane.
    pub fn integrand(&self, t: Complex64) -> Complex64 {
        let pts = self.prevertices();
        let (mut lm, mut ph) = (0.0, 0.0);
        for (p, a) in pts.iter().zip(&self.exponents) {
            let d = t - p;
            let e = 0.5 * *a as f64;
            lm += e * d.norm().ln();
            ph += e * branch_arg(d);
        }
        from_log(lm, ph)
    }

    /// Constant phase of the integrand on edge `k` (`n` for the edge from minus infinity).
    fn edge_phase(&self, k: usize) -> Complex64 {
        let n = self.len();
        let start = if k == n { 0 } else { k + 1 };
        let s: f64 = self.exponents[start.min(n)..].iter().map(|a| 0.5 * *a as f64).sum();
        Complex64::from_polar(1.0, PI * s)
    }

    /// Integral over a half edge anchored at prevertex `k`, running in
    /// direction `dir` over offsets `[0, len]`, of `prod |t - t_i|^(a_i/2)`.
    fn half_edge(&self, k: usize, dir: f64, len: f64, nodes: usize) -> f64 {
        let n = self.len();
        let e: Vec<f64> = self.exponents.iter().map(|a| 0.5 * *a as f64).collect();
        // Unsigned distances from t_k to every other prevertex, with a flag for
        // whether it lies behind (distance grows with the offset) or ahead.
        let mut behind = Vec::new();
        let mut ahead = Vec::new();
        for i in 0..n {
            if i == k {
                continue;
            }
            let d = self.diff(i, k) * dir;
            if d < 0.0 {
                behind.push((-d, e[i]));
            } else {
                ahead.push((d, e[i]));
            }
        }
        self.half_edge_rec(e[k], &behind, &ahead, 0.0, len, nodes, 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn half_edge_rec(
        &self,
        e_anchor: f64,
        behind: &[(f64, f64)],
        ahead: &[(f64, f64)],
        u0: f64,
        u1: f64,
        nodes: usize,
        depth: usize,
    ) -> f64 {
        let h = u1 - u0;
        let weighted = u0 == 0.0;
        let mut dmin = f64::INFINITY;
        for (d, _) in behind {
            dmin = dmin.min(d + u0);
        }
        for (d, _) in ahead {
            dmin = dmin.min(d - u1);
        }
        if !weighted {
            dmin = dmin.min(u0);
        }
        if dmin < h && depth < 200 {
            // Split next to the nearest singularity when it is close to an end.
            let m = if weighted && dmin < 0.25 * h { dmin.max(h * 1e-3) } else { 0.5 * h };
            return self.half_edge_rec(e_anchor, behind, ahead, u0, u0 + m, nodes, depth + 1)
                + self.half_edge_rec(e_anchor, behind, ahead, u0 + m, u1, nodes, depth + 1);
        }
        let beta = if weighted { e_anchor } else { 0.0 };
        let rule = gauss_jacobi(nodes, 0.0, beta);
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let u = u0 + half * (1.0 + x);
            let mut lm = if weighted { 0.0 } else { e_anchor * u.ln() };
            for (d, ei) in behind {
                lm += ei * (d + u).ln();
            }
            for (d, ei) in ahead {
                // Offsets never exceed half the distance to a point ahead.
                lm += ei * (d - u).ln();
            }
            acc += w * lm.exp();
        }
        acc * half.powf(1.0 + beta)
    }

    /// Tail `int_{t_k + D}^inf` (dir = 1) or `int_{-inf}^{t_k - D}` (dir = -1)
    /// of `prod |t - t_i|^(a_i/2)` via `t = t_k + dir / s`.
    fn tail(&self, k: usize, dir: f64, big_d: f64, nodes: usize) -> f64 {
        let e_inf = 0.5 * self.exponent_inf as f64;
        let rule = gauss_jacobi(nodes, 0.0, e_inf);
        let smax = 1.0 / big_d;
        let half = 0.5 * smax;
        let dists: Vec<(f64, f64)> = (0..self.len())
            .map(|i| ((self.diff(k, i) * dir).abs(), 0.5 * self.exponents[i] as f64))
            .collect();
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let s = half * (1.0 + x);
            let lm: f64 = dists.iter().map(|(d, e)| e * (1.0 + s * d).ln()).sum();
            acc += w * lm.exp();
        }
        acc * half.powf(1.0 + e_inf)
    }

    fn edge_magnitude(&self, k: usize, nodes: usize) -> Result<f64> {
        let n = self.len();
        let check = |i: usize| -> Result<()> {
            if self.exponents[i] <= -2 {
                Err(Error::Divergence(k))
            } else {
                Ok(())
            }
        };
        if k + 1 < n {
            check(k)?;
            check(k + 1)?;
            let m = 0.5 * self.gaps[k];
            Ok(self.half_edge(k, 1.0, m, nodes) + self.half_edge(k + 1, -1.0, m, nodes))
        } else if k == n - 1 || k == n {
            let (anchor, dir) = if k == n - 1 { (n - 1, 1.0) } else { (0, -1.0) };
            check(anchor)?;
            if self.exponent_inf <= -2 {
                return Err(Error::Divergence(k));
            }
            let spread = if n > 1 { self.diff(n - 1, 0) } else { 0.0 };
            let big_d = spread.max(1.0);
            Ok(self.half_edge(anchor, dir, big_d, nodes) + self.tail(anchor, dir, big_d, nodes))
        } else {
            Err(Error::Geometry(format!("edge index {k} out of range")))
        }
    }

    /// Integral of the integrand over edge `k`, from left to right along the
    /// real axis. Edge `n - 1` runs to `+inf`, edge `n` comes from `-inf`.
    pub fn edge_period(&self, k: usize) -> Result<Complex64> {
        let mut nodes = BASE_NODES;
        let mut prev = self.edge_magnitude(k, nodes)?;
        loop {
            nodes *= 2;
            let next = self.edge_magnitude(k, nodes)?;
            if (next - prev).abs() <= EDGE_TOL * next.abs() || nodes >= MAX_NODES {
                return Ok(self.edge_phase(k) * next);
            }
            prev = next;
        }
    }

    /// Developed positions of the finite vertices, starting at the origin.
    pub fn develop(&self) -> Result<Vec<Complex64>> {
        let mut w = vec![Complex64::new(0.0, 0.0)];
        for k in 0..self.len().saturating_sub(1) {
            let e = self.edge_period(k)?;
            let last = *w.last().unwrap();
            w.push(last + e);
        }
        Ok(w)
    }
}

/// Integral of the Schwarz-Christoffel integrand from `base` to `z` along a
/// path in the closed upper half-plane.
pub fn eval_sc(poly: &ConformalPolygon, z: Complex64, base: Complex64) -> Result<Complex64> {
    if z == base {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let pts = poly.prevertices();
    let hits = |w: Complex64| pts.iter().position(|p| w.im == 0.0 && w.re == *p);
    for w in [z, base] {
        if let Some(i) = hits(w) {
            if poly.exponents[i] <= -2 {
                return Err(Error::SingularPath(i));
            }
        }
    }
    if z.im == 0.0 && base.im == 0.0 {
        let (lo, hi) = if z.re < base.re { (z.re, base.re) } else { (base.re, z.re) };
        if pts.iter().any(|p| *p > lo && *p < hi) {
            // Detour above the real axis through two corners.
            let lift = Complex64::new(0.0, 0.5 * (hi - lo));
            let a = eval_segment(poly, &pts, base, base + lift)?;
            let b = eval_segment(poly, &pts, base + lift, z + lift)?;
            let c = eval_segment(poly, &pts, z + lift, z)?;
            return Ok(a + b + c);
        }
    }
    eval_segment(poly, &pts, base, z)
}

/// Straight-segment integral with singular endpoints absorbed by Gauss-Jacobi.
fn eval_segment(poly: &ConformalPolygon, pts: &[f64], z0: Complex64, z1: Complex64) -> Result<Complex64> {
    let at = |w: Complex64| pts.iter().position(|p| w.im == 0.0 && w.re == *p);
    let e0 = at(z0).map(|i| 0.5 * poly.exponents[i] as f64);
    let e1 = at(z1).map(|i| 0.5 * poly.exponents[i] as f64);
    let mut nodes = 32;
    let mut prev = segment_rec(poly, pts, z0, z1, 0.0, 1.0, e0, e1, nodes, 0);
    loop {
        nodes *= 2;
        let next = segment_rec(poly, pts, z0, z1, 0.0, 1.0, e0, e1, nodes, 0);
        if (next - prev).norm() <= 1e-12 * next.norm().max(1e-300) || nodes >= 256 {
            return Ok(next);
        }
        prev = next;
    }
}

#[allow(clippy::too_many_arguments)]
fn segment_rec(
    poly: &ConformalPolygon,
    pts: &[f64],
    z0: Complex64,
    z1: Complex64,
    s0: f64,
    s1: f64,
    e0: Option<f64>,
    e1: Option<f64>,
    nodes: usize,
    depth: usize,
) -> Complex64 {
    let dz = z1 - z0;
    let a = z0 + dz * s0;
    let b = z0 + dz * s1;
    let len = (b - a).norm();
    let w_left = if s0 == 0.0 { e0 } else { None };
    let w_right = if s1 == 1.0 { e1 } else { None };
    let mut dmin = f64::INFINITY;
    for p in pts {
        let pz = Complex64::new(*p, 0.0);
        if (w_left.is_some() && pz == a) || (w_right.is_some() && pz == b) {
            continue;
        }
        dmin = dmin.min(point_segment_distance(pz, a, b));
    }
    if dmin < len && depth < 60 {
        let m = 0.5 * (s0 + s1);
        return segment_rec(poly, pts, z0, z1, s0, m, e0, e1, nodes, depth + 1)
            + segment_rec(poly, pts, z0, z1, m, s1, e0, e1, nodes, depth + 1);
    }
    let beta = w_left.unwrap_or(0.0);
    let alpha = w_right.unwrap_or(0.0);
    let rule = gauss_jacobi(nodes, alpha, beta);
    let half = 0.5 * (b - a);
    let hl = half.norm();
    let dir = half / hl;
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let t = a + half * (1.0 + x);
        let (mut lm, mut ph) = (0.0, 0.0);
        for (i, p) in pts.iter().enumerate() {
            let pz = Complex64::new(*p, 0.0);
            let e = 0.5 * poly.exponents[i] as f64;
            let d = if w_left.is_some() && pz == a {
                // (t - t_i) = dir * (1 + x) * hl, magnitude carried by the weight.
                ph += e * branch_arg(dir);
                continue;
            } else if w_right.is_some() && pz == b {
                ph += e * branch_arg(-dir);
                continue;
            } else {
                t - pz
            };
            lm += e * d.norm().ln();
            ph += e * branch_arg(d);
        }
        acc += from_log(lm, ph) * *w;
    }
    acc * half * hl.powf(alpha + beta)
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a) * ab.conj()).re / l2;
    let s = s.clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Prevertex index range `[lo, hi]` enclosed by a cycle, with the crossing
/// points on the real axis expressed as `(anchor index, offset)`.
struct CycleGeometry {
    lo: usize,
    hi: usize,
    left: (usize, f64),
    right: (usize, f64),
}

fn cycle_geometry(poly: &ConformalPolygon, c: &Cycle) -> Result<Option<CycleGeometry>> {
    let n = poly.len();
    let (from, to) = match c.kind {
        CycleKind::Encircling { edge } => {
            if edge + 1 >= n {
                return Err(Error::Geometry(format!("edge {edge} is not a finite edge")));
            }
            if poly.gaps[edge] == 0.0 {
                return Ok(None);
            }
            (if edge == 0 { n } else { edge - 1 }, edge + 1)
        }
        CycleKind::Connecting { from_edge, to_edge } => (from_edge, to_edge),
    };
    let from_i: isize = if from == n { -1 } else { from as isize };
    if from > n || to >= n || (to as isize) < from_i + 2 || (from_i == -1 && to == n - 1) {
        return Err(Error::Geometry(format!("edges {from} and {to} are adjacent or invalid")));
    }
    let lo = (from_i + 1) as usize;
    let hi = to;
    let span = poly.diff(hi, lo);
    let left = if from_i < 0 {
        let g = if n > 1 { poly.gaps[0] } else { 1.0 };
        (0usize, -span.max(g).max(1e-300))
    } else {
        (from, 0.5 * poly.gaps[from])
    };
    let right = if to == n - 1 {
        let g = if n > 1 { poly.gaps[n - 2] } else { 1.0 };
        (n - 1, span.max(g).max(1e-300))
    } else {
        (to, 0.5 * poly.gaps[to])
    };
    Ok(Some(CycleGeometry { lo, hi, left, right }))
}

/// Half the integral over the closed curve on the double cover, oriented so
/// that the cycle encircling edge `k` has period equal to `edge_period(k)`.
pub fn cycle_period(poly: &ConformalPolygon, c: Cycle) -> Result<Complex64> {
    let n = poly.len();
    let geo = match cycle_geometry(poly, &c)? {
        Some(g) => g,
        None => return Ok(Complex64::new(0.0, 0.0)),
    };
    let odd = (geo.lo..=geo.hi).filter(|i| poly.exponents[*i].rem_euclid(2) == 1).count();
    if odd % 2 == 1 {
        return Err(Error::Geometry("cycle encloses an odd number of branch points".into()));
    }
    // Distances of every prevertex from the two crossing points.
    let from_left: Vec<f64> = (0..n).map(|i| poly.diff(i, geo.left.0) - geo.left.1).collect();
    let from_right: Vec<f64> = (0..n).map(|i| poly.diff(i, geo.right.0) - geo.right.1).collect();
    let radius = 0.5 * (poly.diff(geo.right.0, geo.left.0) + geo.right.1 - geo.left.1);
    let e: Vec<f64> = poly.exponents.iter().map(|a| 0.5 * *a as f64).collect();
    let inside: Vec<i8> = (0..n)
        .map(|i| if i < geo.lo { -1 } else if i > geo.hi { 1 } else { 0 })
        .collect();
    let f = |theta: f64| -> Complex64 {
        let eith = Complex64::from_polar(1.0, theta);
        let (mut lm, mut ph) = (0.0, 0.0);
        for i in 0..n {
            // t - t_i measured from the nearer crossing point.
            let d = if theta.cos() >= 0.0 {
                Complex64::new(-2.0 * radius * (0.5 * theta).sin().powi(2), radius * theta.sin()) - from_right[i]
            } else {
                Complex64::new(2.0 * radius * (0.5 * theta).cos().powi(2), radius * theta.sin()) - from_left[i]
            };
            let a = d.im.atan2(d.re);
            let arg = match inside[i] {
                0 => theta + wrap(a - theta),
                1 => PI + wrap(a - PI),
                _ => wrap(a),
            };
            lm += e[i] * d.norm().ln();
            ph += e[i] * arg;
        }
        from_log(lm, ph) * Complex64::i() * eith * radius
    };
    // Coarse magnitude scale for the relative tolerance.
    let panels = 64;
    let mut scale = 0.0;
    for p in 0..panels {
        let th = 0.5 * PI + 2.0 * PI * (p as f64 + 0.5) / panels as f64;
        scale += f(th).norm() * 2.0 * PI / panels as f64;
    }
    let total = adaptive_theta(&f, 0.5 * PI, 2.5 * PI, 1e-13 * scale.max(1e-300), 40);
    let mut val = -0.5 * total;
    if c.reversed {
        val = -val;
    }
    Ok(val)
}

fn adaptive_theta<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> Complex64 {
    let rule_c = gauss_legendre(20);
    let rule_f = gauss_legendre(40);
    let integ = |rule: &crate::quadrature::GaussRule| {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    };
    let coarse = integ(&rule_c);
    let fine = integ(&rule_f);
    if (fine - coarse).norm() <= tol || depth == 0 {
        return fine;
    }
    let m = 0.5 * (a + b);
    adaptive_theta(f, a, m, 0.5 * tol, depth - 1) + adaptive_theta(f, m, b, 0.5 * tol, depth - 1)
}

/// The same period as [`cycle_period`] computed from edge periods: the sum of
/// the edges between the crossing points on which the lower sheet differs
/// from the upper one. Requires no pole inside the cycle.
pub fn cycle_period_from_edges(poly: &ConformalPolygon, c: Cycle) -> Result<Complex64> {
    let geo = match cycle_geometry(poly, &c)? {
        Some(g) => g,
        None => return Ok(Complex64::new(0.0, 0.0)),
    };
    let mut sign = 1i32;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in geo.lo..geo.hi {
        if poly.exponents[m].rem_euclid(2) == 1 {
            sign = -sign;
        }
        if poly.exponents[m] <= -2 || poly.exponents[m + 1] <= -2 {
            return Err(Error::Divergence(m));
        }
        if sign == -1 {
            acc += poly.edge_period(m)?;
        }
    }
    if c.reversed {
        acc = -acc;
    }
    Ok(acc)
}

/// Period of `c` after the prevertices `t_j` and `t_{j+1}` are carried once
/// around each other, `turns` times (negative turns reverse the direction).
///
/// Both prevertices rotate about the midpoint of edge `j`, which realises the
/// same braid as moving `t_{j+1}` once around `t_j`. The contour is dragged by
/// a twist homeomorphism supported near that midpoint and the branch of every
/// factor is continued by nearest-phase tracking.
pub fn continue_period(poly: &ConformalPolygon, j: usize, c: Cycle, turns: i32) -> Result<Complex64> {
    if turns == 0 {
        return cycle_period(poly, c);
    }
    let n = poly.len();
    if j + 1 >= n {
        return Err(Error::Geometry(format!("prevertex {j} has no right neighbour")));
    }
    let d = poly.gaps[j];
    let left_room = if j > 0 { poly.gaps[j - 1] } else { f64::INFINITY };
    let right_room = if j + 2 < n { poly.gaps[j + 1] } else { f64::INFINITY };
    let room = left_room.min(right_room).min(d.max(1e-300) * 4.0);
    if !(room > 0.0) || !(d > 0.0) {
        return Err(Error::Geometry("rotation disk meets another prevertex".into()));
    }
    let mut steps = 64usize;
    let mut prev = continue_steps(poly, j, &c, turns, steps, room)?;
    loop {
        steps *= 2;
        let next = continue_steps(poly, j, &c, turns, steps, room)?;
        if (next - prev).norm() <= 1e-8 * next.norm().max(1e-300) || steps >= 1024 {
            return Ok(next);
        }
        prev = next;
    }
}

fn continue_steps(poly: &ConformalPolygon, j: usize, c: &Cycle, turns: i32, steps: usize, room: f64) -> Result<Complex64> {
    let n = poly.len();
    let geo = match cycle_geometry(poly, c)? {
        Some(g) => g,
        None => return Ok(Complex64::new(0.0, 0.0)),
    };
    let odd = (geo.lo..=geo.hi).filter(|i| poly.exponents[*i].rem_euclid(2) == 1).count();
    if odd % 2 == 1 {
        return Err(Error::Geometry("cycle encloses an odd number of branch points".into()));
    }
    let pts = poly.prevertices();
    let d = poly.gaps[j];
    let mid = pts[j] + 0.5 * d;
    let r1 = 0.5 * d + room / 3.0;
    let r2 = 0.5 * d + 2.0 * room / 3.0;
    let xl = pts[geo.left.0] + geo.left.1;
    let xr = pts[geo.right.0] + geo.right.1;
    let center = Complex64::new(0.5 * (xl + xr), 0.0);
    let radius = 0.5 * (xr - xl);
    let e: Vec<f64> = poly.exponents.iter().map(|a| 0.5 * *a as f64).collect();

    // Base contour: circle from the top, counter-clockwise, refined near
    // prevertices and inside the twist annulus.
    let mut thetas = vec![0.5 * PI];
    let nearest = |z: Complex64| pts.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min);
    let base_n = 512;
    for k in 1..=base_n {
        let th0 = 0.5 * PI + 2.0 * PI * (k - 1) as f64 / base_n as f64;
        let th1 = 0.5 * PI + 2.0 * PI * k as f64 / base_n as f64;
        refine_arc(&mut thetas, th0, th1, &|th| center + Complex64::from_polar(radius, th), &nearest, mid, r2, r2 - r1, 0);
    }
    let base: Vec<Complex64> = thetas.iter().map(|th| center + Complex64::from_polar(radius, *th)).collect();

    let twist = |z: Complex64, ang: f64| -> Complex64 {
        let m = Complex64::new(mid, 0.0);
        let r = (z - m).norm();
        let s = if r <= r1 { 1.0 } else if r >= r2 { 0.0 } else { (r2 - r) / (r2 - r1) };
        m + (z - m) * Complex64::from_polar(1.0, ang * s)
    };
    let moving = |ang: f64| -> (Complex64, Complex64) {
        let rot = Complex64::from_polar(0.5 * d, ang);
        (Complex64::new(mid, 0.0) - rot, Complex64::new(mid, 0.0) + rot)
    };
    let positions = |ang: f64| -> Vec<Complex64> {
        let (a, b) = moving(ang);
        (0..n)
            .map(|i| if i == j { a } else if i == j + 1 { b } else { Complex64::new(pts[i], 0.0) })
            .collect()
    };

    // Track the branch of every factor at the contour start across steps.
    let total_angle = 2.0 * PI * turns as f64;
    let mut anchor: Vec<f64> = {
        let z0 = base[0];
        pts.iter().map(|p| branch_arg(z0 - p)).collect()
    };
    for s in 1..=steps {
        let ang = total_angle * s as f64 / steps as f64;
        let z0 = twist(base[0], ang);
        let pos = positions(ang);
        for i in 0..n {
            let a = (z0 - pos[i]).arg();
            anchor[i] = a + 2.0 * PI * ((anchor[i] - a) / (2.0 * PI)).round();
        }
    }
    let ang = total_angle;
    let pos = positions(ang);
    let contour: Vec<Complex64> = base.iter().map(|z| twist(*z, ang)).chain(std::iter::once(twist(base[0], ang))).collect();
    let rule = gauss_legendre(20);
    let mut args = anchor;
    let mut acc = Complex64::new(0.0, 0.0);
    for w in contour.windows(2) {
        let (za, zb) = (w[0], w[1]);
        // Sub-divide so each piece is short relative to the nearest prevertex.
        let mut pieces = vec![(za, zb)];
        let mut out = Vec::new();
        while let Some((a, b)) = pieces.pop() {
            let dist = pos.iter().map(|p| (a - p).norm().min((b - p).norm())).fold(f64::INFINITY, f64::min);
            if (b - a).norm() > 0.25 * dist && out.len() + pieces.len() < 100_000 {
                let m = 0.5 * (a + b);
                pieces.push((m, b));
                pieces.push((a, m));
            } else {
                out.push((a, b));
            }
        }
        for (a, b) in out {
            let half = 0.5 * (b - a);
            let midp = 0.5 * (a + b);
            let start_args: Vec<f64> = (0..n)
                .map(|i| {
                    let raw = (a - pos[i]).arg();
                    raw + 2.0 * PI * ((args[i] - raw) / (2.0 * PI)).round()
                })
                .collect();
            let mut piece = Complex64::new(0.0, 0.0);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let t = midp + half * *x;
                let (mut lm, mut ph) = (0.0, 0.0);
                for i in 0..n {
                    let dd = t - pos[i];
                    let raw = dd.arg();
                    let ai = raw + 2.0 * PI * ((start_args[i] - raw) / (2.0 * PI)).round();
                    lm += e[i] * dd.norm().ln();
                    ph += e[i] * ai;
                }
                piece += from_log(lm, ph) * *wt;
            }
            acc += piece * half;
            for i in 0..n {
                let raw = (b - pos[i]).arg();
                args[i] = raw + 2.0 * PI * ((start_args[i] - raw) / (2.0 * PI)).round();
            }
        }
    }
    let mut val = -0.5 * acc;
    if c.reversed {
        val = -val;
    }
    Ok(val)
}

#[allow(clippy::too_many_arguments)]
fn refine_arc<P, N>(out: &mut Vec<f64>, th0: f64, th1: f64, p: &P, nearest: &N, mid: f64, r2: f64, annulus: f64, depth: usize)
where
    P: Fn(f64) -> Complex64,
    N: Fn(Complex64) -> f64,
{
    let a = p(th0);
    let b = p(th1);
    let chord = (b - a).norm();
    let m = p(0.5 * (th0 + th1));
    let near_twist = (m - Complex64::new(mid, 0.0)).norm() < r2 + chord;
    let limit = if near_twist { (0.2 * nearest(m)).min(annulus / 16.0) } else { 0.2 * nearest(m) };
    if chord > limit && depth < 30 {
        let c = 0.5 * (th0 + th1);
        refine_arc(out, th0, c, p, nearest, mid, r2, annulus, depth + 1);
        refine_arc(out, c, th1, p, nearest, mid, r2, annulus, depth + 1);
    } else {
        out.push(th1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt_poly() -> ConformalPolygon {
        ConformalPolygon::new(&[0.0], &[-1], -3, vec![VertexLabel::Free])
    }

    #[test]
    fn validate_examples() {
        let p = ConformalPolygon::new(&[-1.0, 0.0, 1.0], &[1, -1, 1], -4, vec![VertexLabel::Free; 3]);
        match p.validate() {
            Err(Error::ExponentSum { expected, deficit, .. }) => {
                assert_eq!(expected, -5);
                assert_eq!(deficit, -1);
            }
            other => panic!("{other:?}"),
        }
        let empty = ConformalPolygon::new(&[], &[], -4, vec![]);
        assert!(empty.validate().is_err());
        assert!(sqrt_poly().validate().is_ok());
    }

    #[test]
    fn eval_sc_closed_form() {
        let p = sqrt_poly();
        let v = eval_sc(&p, Complex64::new(4.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-12, "{v}");
        let z = eval_sc(&p, Complex64::new(0.3, 0.2), Complex64::new(0.3, 0.2)).unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.0));
        // Through the prevertex: int_{-1}^{1} t^{-1/2} = 1 + i.
        let w = eval_sc(&p, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)).unwrap();
        assert!((w - Complex64::new(2.0, -2.0)).norm() < 1e-10, "{w}");
    }

    #[test]
    fn edge_period_elementary() {
        // int_0^1 t^{-1/2} (1 - t)^{-1/2} dt = pi, phase from (t - 1)^{-1/2}.
        let p = ConformalPolygon::with_forced_infinity(&[0.0, 1.0], &[-1, -1], vec![VertexLabel::Free; 2]);
        let e = p.edge_period(0).unwrap();
        assert!((e.norm() - PI).abs() < 1e-12, "{e}");
        assert!(e.re.abs() < 1e-12);
        // int_1^inf t^{-1/2} (t-1)^{-1/2} ... a_inf = -2 diverges.
        assert!(matches!(p.edge_period(1), Err(Error::Divergence(1))));
    }

    #[test]
    fn contractible_cycle_is_zero() {
        let p = ConformalPolygon::with_forced_infinity(&[-1.0, 0.0, 0.5, 1.0], &[-1, 1, -1, 1], vec![VertexLabel::Free; 4]);
        let v = cycle_period(&p, Cycle::encircling(1)).unwrap();
        let e = p.edge_period(1).unwrap();
        assert!((v - e).norm() < 1e-10 * e.norm(), "{v} vs {e}");
    }
}
