//! Conjugate orthodisk pairs for genus `g`: the staircase boundaries built
//! from geometric coordinates, their cone exponents, and the
//! Schwarz-Christoffel parameter problem that places the prevertices.
//!
//! Both domains share a zigzag of `2g` axis-parallel edges from
//! `P_0 = (0, -1/2)` to `P_2g = (1/2, 0)`, symmetric under the reflection
//! `(x, y) -> (-y, -x)` across the diagonal `y = -x`, with edge lengths
//! `l_1, ..., l_g, l_g, ..., l_1` summing to 1. The upper-left domain lies
//! above the zigzag inside `{x > -b, y < b}`; the lower-right domain lies
//! below it, outside the quadrant `{x > b, y < -b}`. Each has two half-strip
//! ends of width `b` and a corner `V`.
//!
//! On the half-plane the prevertices are normalized to `E_2 = -1`,
//! `P_0 < ... < P_2g` symmetric about `P_g = 0`, `E_1 = 1` and `V = inf`.
//! The lower-right domain is traversed in the opposite direction along the
//! zigzag, so its `P_j` is the staircase vertex `P_{2g-j}`.

use crate::error::{Error, Result};
use crate::genus1::Domain;
use crate::scmap::{ConformalPolygon, VertexLabel};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Coordinates on the space of genus-`g` staircase pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricCoords {
    /// Genus `g >= 1`.
    pub genus: usize,
    /// Free edge lengths `l_1, ..., l_{g-1}`; `l_g = 1/2 - sum` is implied.
    pub edges: Vec<f64>,
    /// Half-strip width.
    pub b: f64,
}

impl GeometricCoords {
    /// Build and validate.
    pub fn new(genus: usize, edges: Vec<f64>, b: f64) -> Result<Self> {
        let c = Self { genus, edges, b };
        c.validate()?;
        Ok(c)
    }

    /// The `g` coordinates `(l_1, ..., l_{g-1}, b)` as a vector.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.edges.clone();
        v.push(self.b);
        v
    }

    /// Inverse of [`Self::to_vec`].
    pub fn from_vec(genus: usize, v: &[f64]) -> Result<Self> {
        if v.len() != genus {
            return Err(Error::Validation(format!("expected {genus} coordinates, got {}", v.len())));
        }
        Self::new(genus, v[..genus - 1].to_vec(), v[genus - 1])
    }

    /// All `g` independent edge lengths `l_1, ..., l_g`.
    pub fn all_edges(&self) -> Vec<f64> {
        let mut l = self.edges.clone();
        l.push(0.5 - self.edges.iter().sum::<f64>());
        l
    }

    /// The `2g` zigzag edge lengths in order from `P_0` to `P_2g`.
    pub fn zigzag(&self) -> Vec<f64> {
        let l = self.all_edges();
        l.iter().chain(l.iter().rev()).copied().collect()
    }

    /// Staircase vertices `P_0, ..., P_2g`; odd edges are horizontal.
    pub fn staircase(&self) -> Vec<[f64; 2]> {
        let mut p = [0.0, -0.5];
        let mut out = vec![p];
        for (k, l) in self.zigzag().iter().enumerate() {
            if k % 2 == 0 {
                p[0] += l;
            } else {
                p[1] += l;
            }
            out.push(p);
        }
        out
    }

    /// Diagonal offset `c`: the largest `min(x, -y)` over staircase vertices,
    /// attained at the central vertex `P_g = (c, -c)` for monotone zigzags.
    /// The lower-right domain is embedded iff `b > c`.
    pub fn diagonal_offset(&self) -> f64 {
        self.staircase().iter().map(|p| p[0].min(-p[1])).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Check the invariants.
    pub fn validate(&self) -> Result<()> {
        if self.genus < 1 {
            return Err(Error::Validation("genus must be at least 1".into()));
        }
        if self.edges.len() + 1 != self.genus {
            return Err(Error::Validation(format!(
                "genus {} needs {} free edge lengths, got {}",
                self.genus,
                self.genus - 1,
                self.edges.len()
            )));
        }
        if !self.b.is_finite() || self.b <= 0.0 {
            return Err(Error::Validation(format!("strip width {} must be positive", self.b)));
        }
        for (j, l) in self.all_edges().iter().enumerate() {
            if !l.is_finite() || *l <= 0.0 {
                return Err(Error::Validation(format!("edge l_{} = {l} must be positive", j + 1)));
            }
        }
        let c = self.diagonal_offset();
        if self.b <= c {
            return Err(Error::BoundaryStratum(format!("b = {} does not exceed the diagonal offset c = {c}", self.b)));
        }
        Ok(())
    }
}

/// Which side of the zigzag a domain occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Above and left of the zigzag, corner `V = (-b, b)` with angle `pi/2`.
    UpperLeft,
    /// Below and right of the zigzag, corner `V = (b, -b)` with angle `3pi/2`.
    LowerRight,
}

/// Side occupied by a domain at genus `g`: `Gdh` is upper-left for even `g`
/// and lower-right for odd `g`, so its central angle is always `3pi/2`.
pub fn side_of(g: usize, domain: Domain) -> Side {
    let gdh_upper = g % 2 == 0;
    match (domain, gdh_upper) {
        (Domain::Gdh, true) | (Domain::GinvDh, false) => Side::UpperLeft,
        _ => Side::LowerRight,
    }
}

/// A vertex of a staircase boundary in traversal order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StairVertex {
    /// Label in half-plane order.
    pub label: VertexLabel,
    /// Planar position; `None` for the ends at infinity.
    pub position: Option<[f64; 2]>,
    /// Cone exponent (`-1` for angle `pi/2`, `+1` for `3pi/2`, `-2` for an end).
    pub exponent: i32,
}

/// One domain of the pair as a closed boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Staircase {
    /// Domain name.
    pub domain: Domain,
    /// Side of the zigzag.
    pub side: Side,
    /// `E_2, P_0, ..., P_2g, E_1, V` with the domain on the left.
    pub vertices: Vec<StairVertex>,
    /// Half-strip widths at `E_2` and `E_1`.
    pub strip_widths: [f64; 2],
}

impl Staircase {
    /// Complex edge vectors `P_{j-1} -> P_j`, `j = 1..2g`, in traversal order.
    pub fn edge_vectors(&self) -> Vec<Complex64> {
        let ps: Vec<[f64; 2]> = self
            .vertices
            .iter()
            .filter(|v| matches!(v.label, VertexLabel::P(_)))
            .filter_map(|v| v.position)
            .collect();
        ps.windows(2).map(|w| Complex64::new(w[1][0] - w[0][0], w[1][1] - w[0][1])).collect()
    }

    /// Edge vectors expressed in the frame where the first edge points along
    /// the positive real axis (common base direction).
    pub fn normalized_edge_vectors(&self) -> Vec<Complex64> {
        let e = self.edge_vectors();
        let dir = e[0] / e[0].norm();
        e.iter().map(|v| v / dir).collect()
    }

    /// Finite exponents in half-plane order and the exponent of `V` at infinity.
    pub fn exponents(&self) -> (Vec<i32>, i32) {
        let n = self.vertices.len();
        (self.vertices[..n - 1].iter().map(|v| v.exponent).collect(), self.vertices[n - 1].exponent)
    }
}

/// The conjugate pair of staircase domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthodiskPair {
    /// Generating coordinates.
    pub coords: GeometricCoords,
    /// The `Gdh` domain.
    pub gdh: Staircase,
    /// The `G^-1 dh` domain.
    pub ginvdh: Staircase,
}

impl OrthodiskPair {
    /// Domain by name.
    pub fn domain(&self, d: Domain) -> &Staircase {
        match d {
            Domain::Gdh => &self.gdh,
            Domain::GinvDh => &self.ginvdh,
        }
    }

    /// Mutable domain by name.
    pub fn domain_mut(&mut self, d: Domain) -> &mut Staircase {
        match d {
            Domain::Gdh => &mut self.gdh,
            Domain::GinvDh => &mut self.ginvdh,
        }
    }
}

/// Exponents of a domain in half-plane order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexExponents {
    /// `E_2, P_0, ..., P_2g, E_1`.
    pub finite: Vec<i32>,
    /// Exponent of `V` at infinity.
    pub at_infinity: i32,
}

/// Cone exponents of the genus-`g` domain.
pub fn vertex_exponents(g: usize, domain: Domain) -> VertexExponents {
    let side = side_of(g, domain);
    let p = |j: usize| -> i32 {
        let even = j % 2 == 0;
        match (side, even) {
            (Side::UpperLeft, true) | (Side::LowerRight, false) => 1,
            _ => -1,
        }
    };
    let mut finite = vec![-2];
    finite.extend((0..=2 * g).map(p));
    finite.push(-2);
    let at_infinity = -4 - finite.iter().sum::<i32>();
    VertexExponents { finite, at_infinity }
}

fn build_side(coords: &GeometricCoords, domain: Domain) -> Staircase {
    let g = coords.genus;
    let side = side_of(g, domain);
    let ex = vertex_exponents(g, domain);
    let mut stair = coords.staircase();
    if side == Side::LowerRight {
        stair.reverse();
    }
    let b = coords.b;
    let mut vertices = vec![StairVertex { label: VertexLabel::E(2), position: None, exponent: -2 }];
    for (j, p) in stair.iter().enumerate() {
        vertices.push(StairVertex { label: VertexLabel::P(j), position: Some(*p), exponent: ex.finite[j + 1] });
    }
    vertices.push(StairVertex { label: VertexLabel::E(1), position: None, exponent: -2 });
    let v = match side {
        Side::UpperLeft => [-b, b],
        Side::LowerRight => [b, -b],
    };
    vertices.push(StairVertex { label: VertexLabel::V, position: Some(v), exponent: ex.at_infinity });
    Staircase { domain, side, vertices, strip_widths: [b, b] }
}

/// Build the conjugate pair from geometric coordinates.
pub fn build_pair(coords: &GeometricCoords) -> Result<OrthodiskPair> {
    coords.validate()?;
    Ok(OrthodiskPair { coords: coords.clone(), gdh: build_side(coords, Domain::Gdh), ginvdh: build_side(coords, Domain::GinvDh) })
}

/// Largest deviation from conjugacy between the two domains: edge vectors in
/// the common base frame are compared with the complex conjugates of their
/// partners, and the strip widths with each other.
pub fn conjugacy_residual(pair: &OrthodiskPair) -> f64 {
    let a = pair.gdh.normalized_edge_vectors();
    let b = pair.ginvdh.normalized_edge_vectors();
    let mut r: f64 = a.iter().zip(&b).map(|(x, y)| (x - y.conj()).norm()).fold(0.0, f64::max);
    for k in 0..2 {
        r = r.max((pair.gdh.strip_widths[k] - pair.ginvdh.strip_widths[k]).abs());
    }
    r
}

/// A polygon solving the parameter problem of one domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPolygon {
    /// Domain name.
    pub domain: Domain,
    /// Genus.
    pub genus: usize,
    /// Normalized polygon (labels `E_2, P_0..P_2g, E_1`, `V` at infinity).
    pub polygon: ConformalPolygon,
    /// Factor mapping integrals of the bare integrand to developed lengths.
    pub scale: f64,
    /// Final residuals `log(developed l_j / l_j)`.
    pub residuals: Vec<f64>,
}

impl FittedPolygon {
    /// The `g + 1` gaps from `E_2` to `P_g`.
    pub fn half_gaps(&self) -> Vec<f64> {
        self.polygon.gaps()[..=self.genus].to_vec()
    }

    /// Developed positions of `P_0, ..., P_2g` with `P_0` at the origin,
    /// including the scale factor.
    pub fn develop(&self) -> Result<Vec<Complex64>> {
        let mut w = vec![Complex64::new(0.0, 0.0)];
        for k in 1..=2 * self.genus {
            let e = self.polygon.edge_period(k)? * self.scale;
            let last = *w.last().unwrap();
            w.push(last + e);
        }
        Ok(w)
    }
}

/// Normalized symmetric polygon of a domain from the `g + 1` gaps between
/// `-1` and `0`.
pub fn polygon_from_half_gaps(g: usize, domain: Domain, half: &[f64]) -> ConformalPolygon {
    let ex = vertex_exponents(g, domain);
    let gaps: Vec<f64> = half.iter().chain(half.iter().rev()).copied().collect();
    let mut labels = vec![VertexLabel::E(2)];
    labels.extend((0..=2 * g).map(VertexLabel::P));
    labels.push(VertexLabel::E(1));
    ConformalPolygon::from_gaps(-1.0, gaps, &ex.finite, ex.at_infinity, labels)
}

/// Modulus of the residue of the bare integrand at `E_1 = 1`.
pub fn residue_at_e1(poly: &ConformalPolygon) -> f64 {
    let n = poly.len();
    let e = poly.exponents();
    (0..n - 1).map(|i| 0.5 * e[i] as f64 * poly.diff(n - 1, i).ln()).sum::<f64>().exp()
}

fn half_gaps_from_u(u: &[f64]) -> Vec<f64> {
    // Softmax with the last logit pinned at zero; gaps sum to 1.
    let m = u.iter().fold(0.0f64, |a, b| a.max(*b));
    let mut w: Vec<f64> = u.iter().map(|v| (v - m).exp()).collect();
    w.push((-m).exp());
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

fn u_from_half_gaps(w: &[f64]) -> Vec<f64> {
    let last = w[w.len() - 1];
    w[..w.len() - 1].iter().map(|v| (v / last).ln()).collect()
}

fn fit_residual(g: usize, domain: Domain, targets: &[f64], b: f64, u: &[f64]) -> Result<Vec<f64>> {
    let half = half_gaps_from_u(u);
    if half.iter().any(|w| !(*w > MIN_GAP)) {
        return Err(Error::Degenerate("prevertex gap below the representable range".into()));
    }
    let poly = polygon_from_half_gaps(g, domain, &half);
    let s = b / (PI * residue_at_e1(&poly));
    (0..g)
        .map(|j| Ok((s * poly.edge_period(j + 1)?.norm() / targets[j]).ln()))
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Smallest prevertex gap the fit will produce.
const MIN_GAP: f64 = 1e-250;

/// Largest Newton step in log-gap coordinates.
const MAX_STEP: f64 = 8.0;

/// Residual evaluations allowed per fit.
const EVALUATION_BUDGET: usize = 1000;

/// Newton solves allowed in the continuation fallback.
const CONTINUATION_BUDGET: usize = 200;

/// Damped Newton on `F(u) = shift` with a forward-difference Jacobian.
fn newton<F: Fn(&[f64]) -> Result<Vec<f64>>>(f: &F, u0: &[f64], shift: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = u0.len();
    let mut u = u0.to_vec();
    let sub = |v: Vec<f64>| -> Vec<f64> { v.iter().zip(shift).map(|(a, b)| a - b).collect() };
    let mut r = sub(f(&u)?);
    for _ in 0..max_iter {
        if max_abs(&r) <= tol {
            return Ok((u, r));
        }
        let h = 1e-7;
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut up = u.clone();
            up[k] += h;
            let rp = sub(f(&up)?);
            for i in 0..n {
                jac[(i, k)] = (rp[i] - r[i]) / h;
            }
        }
        let rhs = -DVector::from_vec(r.clone());
        let step = match jac.lu().solve(&rhs) {
            Some(s) => s,
            None => return Err(Error::Degenerate("singular Jacobian".into())),
        };
        let norm = step.norm();
        let cap = if norm > MAX_STEP { MAX_STEP / norm } else { 1.0 };
        let mut lambda = cap;
        let r0 = r.iter().map(|v| v * v).sum::<f64>();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a + lambda * s).collect();
            if let Ok(v) = f(&trial) {
                let rt = sub(v);
                let r1 = rt.iter().map(|v| v * v).sum::<f64>();
                if r1 < r0 * (1.0 - 1e-4 * lambda) || max_abs(&rt) <= tol {
                    u = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if max_abs(&r) <= tol {
        Ok((u, r))
    } else {
        Err(Error::Fit { domain: String::new(), residuals: r })
    }
}

/// Residual tolerance of the parameter problem (log of length ratios).
pub const FIT_TOL: f64 = 1e-12;

/// Solve the parameter problem for one domain, starting from the given
/// half gaps (or equal gaps). Falls back to continuation in the target
/// lengths from the starting configuration.
pub fn fit_prevertices_from(pair: &OrthodiskPair, domain: Domain, seed: Option<&[f64]>) -> Result<FittedPolygon> {
    let g = pair.coords.genus;
    let targets = pair.coords.all_edges();
    let b = pair.coords.b;
    let u0 = match seed {
        Some(w) if w.len() == g + 1 => u_from_half_gaps(w),
        _ => vec![0.0; g],
    };
    let calls = std::cell::Cell::new(0usize);
    let f = |u: &[f64]| {
        calls.set(calls.get() + 1);
        if calls.get() > EVALUATION_BUDGET {
            return Err(Error::Degenerate("evaluation budget of the prevertex fit exhausted".into()));
        }
        fit_residual(g, domain, &targets, b, u)
    };
    let zero = vec![0.0; g];
    let solved = match newton(&f, &u0, &zero, FIT_TOL, 60) {
        Ok(s) => Ok(s),
        Err(_) => continuation(&f, &u0, g),
    };
    let (u, res) = solved.map_err(|e| match e {
        Error::Fit { residuals, .. } => Error::Fit { domain: domain.to_string(), residuals },
        other => Error::Fit { domain: format!("{domain} ({other})"), residuals: vec![] },
    })?;
    let half = half_gaps_from_u(&u);
    let polygon = polygon_from_half_gaps(g, domain, &half);
    polygon.validate()?;
    let scale = b / (PI * residue_at_e1(&polygon));
    Ok(FittedPolygon { domain, genus: g, polygon, scale, residuals: res })
}

fn continuation<F: Fn(&[f64]) -> Result<Vec<f64>>>(f: &F, u0: &[f64], g: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let f0 = f(u0)?;
    let mut u = u0.to_vec();
    let mut tau = 0.0f64;
    let mut dt = 0.125f64;
    let mut solves = 0;
    while tau < 1.0 {
        solves += 1;
        if solves > CONTINUATION_BUDGET {
            return Err(Error::Fit { domain: String::new(), residuals: f(&u)? });
        }
        let next = (tau + dt).min(1.0);
        let shift: Vec<f64> = f0.iter().map(|v| (1.0 - next) * v).collect();
        let tol = if next >= 1.0 { FIT_TOL } else { 1e-6 };
        match newton(f, &u, &shift, tol, 30) {
            Ok((un, _)) => {
                u = un;
                tau = next;
                dt = (dt * 2.0).min(0.5);
            }
            Err(_) => {
                dt *= 0.5;
                if dt < 1e-6 {
                    return Err(Error::Fit { domain: String::new(), residuals: f(&u)? });
                }
            }
        }
    }
    let r = f(&u)?;
    let _ = g;
    Ok((u, r))
}

/// Fitted polygon with the given half gaps taken as is, with the residuals
/// of the parameter problem evaluated but not reduced.
pub fn fitted_from_half_gaps(coords: &GeometricCoords, domain: Domain, half: &[f64]) -> Result<FittedPolygon> {
    let g = coords.genus;
    if half.len() != g + 1 || half.iter().any(|w| !(*w > MIN_GAP)) {
        return Err(Error::Validation(format!("expected {} positive half gaps", g + 1)));
    }
    let sum: f64 = half.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!("half gaps sum to {sum}, expected 1")));
    }
    let polygon = polygon_from_half_gaps(g, domain, half);
    polygon.validate()?;
    let scale = coords.b / (PI * residue_at_e1(&polygon));
    let targets = coords.all_edges();
    let residuals = (0..g)
        .map(|j| Ok((scale * polygon.edge_period(j + 1)?.norm() / targets[j]).ln()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(FittedPolygon { domain, genus: g, polygon, scale, residuals })
}

/// Solve the parameter problem for one domain from equal gaps.
pub fn fit_prevertices(pair: &OrthodiskPair, domain: Domain) -> Result<FittedPolygon> {
    fit_prevertices_from(pair, domain, None)
}

/// Largest distance between the developed zigzag of a fitted polygon and
/// the staircase of its domain, after moving both `P_0` to the origin and
/// aligning the first edge directions.
pub fn roundtrip_error(pair: &OrthodiskPair, fit: &FittedPolygon) -> Result<f64> {
    let w = fit.develop()?;
    let st = pair.domain(fit.domain);
    let ps: Vec<Complex64> = st
        .vertices
        .iter()
        .filter(|v| matches!(v.label, VertexLabel::P(_)))
        .filter_map(|v| v.position.map(|p| Complex64::new(p[0], p[1])))
        .collect();
    let dir_w = (w[1] - w[0]) / (w[1] - w[0]).norm();
    let dir_s = (ps[1] - ps[0]) / (ps[1] - ps[0]).norm();
    Ok(w.iter()
        .zip(&ps)
        .map(|(a, p)| ((a - w[0]) / dir_w - (p - ps[0]) / dir_s).norm())
        .fold(0.0, f64::max))
}

/// A sequence of genus-two coordinates approaching one boundary stratum of
/// the coordinate space, with the prevertex gaps expected to collapse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPath {
    /// Name of the stratum (`l1`, `l2` or `b-c`).
    pub stratum: String,
    /// Coordinate moved along the path (the first column of a sweep).
    pub parameter: Vec<f64>,
    /// Points of the path, ordered towards the stratum.
    pub points: Vec<GeometricCoords>,
    /// Half-gap indices that shrink to zero, per domain.
    pub collapsing: Vec<(Domain, usize)>,
}

/// Five-point paths towards each boundary stratum of the genus-two
/// coordinates: `l_1 -> 0` at strip width `b`, `l_2 -> 0` at `b = 0.6`, and
/// `b - c -> 0` at first edge `l1`.
///
/// The height blows up only like `exp(1/ext)` while the extremal lengths
/// grow logarithmically in the collapsing edge, so the edge path uses
/// exponentially small lengths.
pub fn genus2_boundary_paths(l1: f64, b: f64) -> Result<Vec<BoundaryPath>> {
    let path = |stratum: &str, parameter: Vec<f64>, f: &dyn Fn(f64) -> Result<GeometricCoords>, collapsing| -> Result<BoundaryPath> {
        Ok(BoundaryPath {
            stratum: stratum.into(),
            points: parameter.iter().map(|v| f(*v)).collect::<Result<_>>()?,
            parameter,
            collapsing,
        })
    };
    Ok(vec![
        path(
            "l1",
            vec![1e-4, 1e-8, 1e-12, 1e-16, 1e-20],
            &|v| GeometricCoords::new(2, vec![v], b),
            vec![(Domain::Gdh, 1), (Domain::GinvDh, 1)],
        )?,
        path(
            "l2",
            vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-6],
            &|v| GeometricCoords::new(2, vec![0.5 - v], 0.6),
            vec![(Domain::Gdh, 2), (Domain::GinvDh, 2)],
        )?,
        path(
            "b-c",
            vec![0.1, 0.05, 0.02, 0.01, 0.005],
            &|v| GeometricCoords::new(2, vec![l1], l1 + v),
            vec![(Domain::GinvDh, 0), (Domain::GinvDh, 1)],
        )?,
    ])
}

/// Checkpoint document of a fitted pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Genus.
    pub genus: usize,
    /// Free edge lengths `l_1..l_{g-1}`.
    pub edges: Vec<f64>,
    /// Strip width.
    pub b: f64,
    /// Prevertices of the `Gdh` polygon in half-plane order.
    pub prevertices_gdh: Vec<f64>,
    /// Prevertices of the `G^-1 dh` polygon in half-plane order.
    pub prevertices_ginvdh: Vec<f64>,
    /// Magnitude of the `P_0` prevertex of the genus-one solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_star: Option<f64>,
    /// Hash of the run configuration that produced the checkpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl Checkpoint {
    /// Assemble from coordinates and the two fits.
    pub fn new(coords: &GeometricCoords, gdh: &FittedPolygon, ginvdh: &FittedPolygon) -> Self {
        Self {
            genus: coords.genus,
            edges: coords.edges.clone(),
            b: coords.b,
            prevertices_gdh: gdh.polygon.prevertices(),
            prevertices_ginvdh: ginvdh.polygon.prevertices(),
            r_star: None,
            config_hash: None,
        }
    }

    /// Coordinates stored in the checkpoint.
    pub fn coords(&self) -> Result<GeometricCoords> {
        GeometricCoords::new(self.genus, self.edges.clone(), self.b)
    }

    /// Half gaps `E_2 .. P_g` of the stored prevertices of a domain.
    pub fn half_gaps(&self, domain: Domain) -> Option<Vec<f64>> {
        let p = match domain {
            Domain::Gdh => &self.prevertices_gdh,
            Domain::GinvDh => &self.prevertices_ginvdh,
        };
        if p.len() != 2 * self.genus + 3 {
            return None;
        }
        Some(p.windows(2).take(self.genus + 1).map(|w| w[1] - w[0]).collect())
    }

    /// Serialize to pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse from JSON.
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Write to a file.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Read from a file.
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircase_closes_on_diagonal() {
        let c = GeometricCoords::new(3, vec![0.1, 0.25], 0.6).unwrap();
        let s = c.staircase();
        assert_eq!(s.len(), 7);
        let last = s[6];
        assert!((last[0] - 0.5).abs() < 1e-15 && last[1].abs() < 1e-15);
        // P_g on the diagonal.
        assert!((s[3][0] + s[3][1]).abs() < 1e-15);
        assert!((c.diagonal_offset() - (0.1 + 0.15)).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_coordinates() {
        assert!(GeometricCoords::new(2, vec![0.0], 1.0).is_err());
        assert!(GeometricCoords::new(2, vec![0.5], 1.0).is_err());
        assert!(matches!(GeometricCoords::new(2, vec![0.3], 0.2), Err(Error::BoundaryStratum(_))));
    }

    #[test]
    fn exponents_balance() {
        for g in 1..5 {
            for d in [Domain::Gdh, Domain::GinvDh] {
                let e = vertex_exponents(g, d);
                assert_eq!(e.at_infinity + e.finite.iter().sum::<i32>(), -4);
                // Central vertex of Gdh has angle 3pi/2.
                if d == Domain::Gdh {
                    assert_eq!(e.finite[g + 1], 1);
                }
            }
            let a = vertex_exponents(g, Domain::Gdh);
            let b = vertex_exponents(g, Domain::GinvDh);
            for j in 1..=2 * g + 1 {
                assert_eq!(a.finite[j], -b.finite[j]);
            }
        }
    }

    #[test]
    fn built_pair_is_conjugate() {
        let c = GeometricCoords::new(2, vec![0.3], 0.9).unwrap();
        let mut p = build_pair(&c).unwrap();
        assert!(conjugacy_residual(&p) <= 1e-12);
        let v = p.ginvdh.vertices[2].position.unwrap();
        p.ginvdh.vertices[2].position = Some([v[0], v[1] + 1e-3]);
        assert!((conjugacy_residual(&p) - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn genus_two_fit_round_trip() {
        let c = GeometricCoords::new(2, vec![0.2], 0.7).unwrap();
        let pair = build_pair(&c).unwrap();
        for d in [Domain::Gdh, Domain::GinvDh] {
            let f = fit_prevertices(&pair, d).unwrap();
            let t = f.polygon.prevertices();
            for i in 0..t.len() {
                assert!((t[i] + t[t.len() - 1 - i]).abs() < 1e-12);
            }
            assert!(roundtrip_error(&pair, &f).unwrap() < 1e-8);
        }
    }
}
