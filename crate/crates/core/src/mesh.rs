//! Triangulated patches of the immersion, their assembly into a doubly
//! periodic surface, and mesh diagnostics and exports.
//!
//! The quarter patch is sampled in the strip chart
//! `zeta = log((t - 1) / (t + 1))`, which maps the upper half-plane onto
//! `{0 < Im zeta < pi}`: the prevertices `P_j` lie on the top edge, `V` is
//! `zeta = 0`, and the ends `E_1`, `E_2` are `Re zeta = -inf, +inf`. Because
//! `dh = (K / 2) d zeta`, the height is linear in `Re zeta` and the ends are
//! truncated by cutting the strip.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre};
use crate::weierstrass::{stereographic_normal, WeierstrassData};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

/// Geometric refinement ratio toward singular points.
pub const GRADING_RATIO: f64 = 0.7;
/// Number of refinement rings around each singular point.
pub const GRADING_RINGS: usize = 8;
/// Largest loop residual, relative to the patch diameter, accepted by
/// [`integrate_patch`].
pub const LOOP_TOL: f64 = 1e-6;

/// Role of a boundary polyline of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcKind {
    /// Image of a boundary segment of the half-plane: a planar symmetry
    /// curve for the surface, a straight line for its conjugate.
    Symmetry,
    /// Truncation of an end.
    EndCut,
}

/// A boundary polyline of a patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    /// Names of the two prevertices bounding the arc, e.g. `E1-V`.
    pub label: String,
    /// Role of the arc.
    pub kind: ArcKind,
    /// Vertex indices in order.
    pub vertices: Vec<usize>,
}

/// Triangle mesh with per-vertex normals and period-lattice metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    /// Vertex positions.
    pub vertices: Vec<[f64; 3]>,
    /// Unit normals per vertex.
    pub normals: Vec<[f64; 3]>,
    /// Triangles, counter-clockwise with respect to the normals.
    pub triangles: Vec<[usize; 3]>,
    /// Horizontal translations generating the period lattice (zero if unknown).
    pub lattice: [[f64; 3]; 2],
    /// Free-form provenance tags.
    pub tags: Vec<String>,
    /// Boundary polylines of a single patch (empty after assembly).
    pub arcs: Vec<BoundaryArc>,
    /// Largest loop residual of the integration, relative to the diameter.
    pub loop_residual: f64,
    /// Vertices whose parameter neighbourhood is free of conical points of
    /// the chart (empty means all).
    #[serde(default)]
    pub regular: Vec<bool>,
}

/// Sampling options of [`integrate_patch_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchOptions {
    /// Base number of cells across the strip.
    pub resolution: usize,
    /// End truncation height in lattice lengths.
    pub extent: f64,
    /// Refine toward singular points.
    pub graded: bool,
}

impl PatchOptions {
    /// Default options at a resolution.
    pub fn new(resolution: usize) -> Self {
        Self { resolution, extent: 3.0, graded: true }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

type Forms = [Complex64; 3];

fn zero_forms() -> Forms {
    [Complex64::new(0.0, 0.0); 3]
}

fn forms_norm(f: &Forms) -> f64 {
    f.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn forms_diff(a: &Forms, b: &Forms) -> f64 {
    (0..3).map(|c| (a[c] - b[c]).norm()).fold(0.0, f64::max)
}

/// Gauss-Legendre (regular) or Gauss-Jacobi with weight `(1 + x)^(-1/2)`
/// (singular at `z0`) over the segment `[z0, z1]`.
fn segment_rule<F: Fn(Complex64) -> Forms>(f: &F, z0: Complex64, z1: Complex64, singular: bool, n: usize) -> Forms {
    let half = 0.5 * (z1 - z0);
    let mid = 0.5 * (z1 + z0);
    let rule = if singular { gauss_jacobi(n, 0.0, -0.5) } else { gauss_legendre(n) };
    let mut acc = zero_forms();
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(mid + half * *x);
        let factor = if singular { (1.0 + x).sqrt() } else { 1.0 };
        for c in 0..3 {
            acc[c] += v[c] * (w * factor);
        }
    }
    for a in acc.iter_mut() {
        *a *= half;
    }
    acc
}

/// Adaptive edge integral with an inverse square root singularity allowed
/// at `z0`.
fn adaptive_segment<F: Fn(Complex64) -> Forms>(f: &F, z0: Complex64, z1: Complex64, singular: bool, depth: usize) -> Forms {
    let coarse = segment_rule(f, z0, z1, singular, 16);
    let fine = segment_rule(f, z0, z1, singular, 32);
    if forms_diff(&fine, &coarse) <= 1e-12 * forms_norm(&fine) || depth == 0 {
        return fine;
    }
    let m = 0.5 * (z0 + z1);
    let a = adaptive_segment(f, z0, m, singular, depth - 1);
    let b = adaptive_segment(f, m, z1, false, depth - 1);
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Integral along `[z0, z1]` with optional singular endpoints.
fn edge_integral<F: Fn(Complex64) -> Forms>(f: &F, z0: Complex64, z1: Complex64, s0: bool, s1: bool) -> Forms {
    match (s0, s1) {
        (false, false) => adaptive_segment(f, z0, z1, false, 24),
        (true, false) => adaptive_segment(f, z0, z1, true, 24),
        (false, true) => {
            let r = adaptive_segment(f, z1, z0, true, 24);
            [-r[0], -r[1], -r[2]]
        }
        (true, true) => {
            let m = 0.5 * (z0 + z1);
            let a = adaptive_segment(f, z0, m, true, 24);
            let b = adaptive_segment(f, z1, m, true, 24);
            [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
        }
    }
}

/// Natural cubic spline through `(x_i, y_i)` evaluated at `at`.
fn natural_spline(x: &[f64], y: &[f64], at: &[f64]) -> Vec<f64> {
    let n = x.len();
    // Second derivatives from the tridiagonal system (Thomas algorithm).
    let mut m = vec![0.0; n];
    if n > 2 {
        let (mut diag, mut rhs) = (vec![0.0; n], vec![0.0; n]);
        for i in 1..n - 1 {
            let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            diag[i] = 2.0 * (h0 + h1);
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        for i in 2..n - 1 {
            let w = (x[i] - x[i - 1]) / diag[i - 1];
            diag[i] -= w * (x[i] - x[i - 1]);
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (1..n - 1).rev() {
            m[i] = (rhs[i] - (x[i + 1] - x[i]) * m[i + 1]) / diag[i];
        }
    }
    at.iter()
        .map(|&t| {
            let k = x.partition_point(|v| *v <= t).clamp(1, n - 1);
            let h = x[k] - x[k - 1];
            let (a, b) = ((x[k] - t) / h, (t - x[k - 1]) / h);
            a * y[k - 1] + b * y[k] + ((a * a * a - a) * m[k - 1] + (b * b * b - b) * m[k]) * h * h / 6.0
        })
        .collect()
}

/// Base grid bent by a smooth spline shift (in node index) so that the
/// nearest node lands on each special coordinate. Keeps the node map smooth
/// uniformly in the resolution. `None` when two specials compete for one
/// node or the shifted grid is not increasing.
fn warped_nodes(base: &[f64], specials: &[f64]) -> Option<Vec<f64>> {
    let n = base.len() - 1;
    let mut knots: Vec<(f64, f64)> = vec![(0.0, 0.0), (n as f64, 0.0)];
    for &s in specials {
        if s <= base[0] || s >= base[n] {
            continue;
        }
        let k = base.partition_point(|b| *b < s);
        let k = if k > 0 && s - base[k - 1] < base[k] - s { k - 1 } else { k };
        if k == 0 || k == n || knots.iter().any(|(i, _)| (*i - k as f64).abs() < 2.0) {
            return None;
        }
        knots.push((k as f64, s - base[k]));
    }
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (x, y): (Vec<f64>, Vec<f64>) = knots.into_iter().unzip();
    let idx: Vec<f64> = (0..=n).map(|k| k as f64).collect();
    let shift = natural_spline(&x, &y, &idx);
    let mut out: Vec<f64> = base.iter().zip(&shift).map(|(b, d)| b + d).collect();
    // Exact values at the knots.
    for (&k, &d) in x.iter().zip(&y) {
        out[k as usize] = base[k as usize] + d;
    }
    out.windows(2).all(|w| w[1] > w[0]).then_some(out)
}

/// Nodes of one axis: a smooth base grid with the special coordinates put
/// on nodes, by a smooth warp when possible and by snapping otherwise, and,
/// if requested, geometric rings around them.
fn axis_nodes(base: &[f64], specials: &[f64], graded: bool) -> Vec<f64> {
    if !graded {
        if let Some(w) = warped_nodes(base, specials) {
            return w;
        }
    }
    let lo = base[0];
    let hi = base[base.len() - 1];
    let spacing = |x: f64| -> f64 {
        let k = base.partition_point(|b| *b < x).clamp(1, base.len() - 1);
        base[k] - base[k - 1]
    };
    let radius = if graded { 1.5 } else { 0.5 };
    let mut keep: Vec<f64> = base
        .iter()
        .copied()
        .filter(|x| *x == lo || *x == hi || specials.iter().all(|s| *x == *s || (x - s).abs() >= radius * spacing(*s)))
        .collect();
    for &s in specials {
        keep.push(s);
        if graded {
            let h = spacing(s);
            for k in 0..=GRADING_RINGS {
                let d = h * GRADING_RATIO.powi(k as i32);
                for x in [s - d, s + d] {
                    if x > lo && x < hi {
                        keep.push(x);
                    }
                }
            }
        }
    }
    keep.sort_by(|a, b| a.total_cmp(b));
    let tiny = 1e-9 * (hi - lo);
    let mut out: Vec<f64> = Vec::with_capacity(keep.len());
    for x in keep {
        match out.last() {
            Some(&y) if x - y < tiny => {
                // Prefer exact special values and the range ends.
                if specials.contains(&x) || x == hi {
                    *out.last_mut().unwrap() = x;
                }
            }
            _ => out.push(x),
        }
    }
    out
}

/// Stretching of the base grid along the strip; cells near the centre are
/// close to square.
const STRETCH: f64 = 4.0;
/// Parameter radius around `V` and the `P_j` inside which the chart is a
/// square-root parametrization; excluded from curvature residuals.
pub const CONICAL_RADIUS: f64 = 0.5;

fn base_u(x: f64, cells: usize) -> Vec<f64> {
    (0..=cells).map(|k| x * (STRETCH * (2.0 * k as f64 / cells as f64 - 1.0)).sinh() / STRETCH.sinh()).collect()
}

/// Strip-chart layout of a half-plane patch.
struct StripLayout {
    us: Vec<f64>,
    vs: Vec<f64>,
    /// Column of each `P_j` on the top row.
    p_columns: Vec<usize>,
    /// Column of `V` on the bottom row.
    v_column: usize,
    /// Exponent of `G` at each `P_j` (sign of `sigma_j`).
    p_sigma: Vec<i32>,
}

impl StripLayout {
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.vs.len() + j
    }

    fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.us[i], self.vs[j])
    }

    fn singular(&self, i: usize, j: usize) -> bool {
        let nv = self.vs.len();
        (j == nv - 1 && self.p_columns.contains(&i)) || (j == 0 && i == self.v_column)
    }
}

fn strip_layout(data: &WeierstrassData, opts: &PatchOptions) -> Result<StripLayout> {
    let p = data.p_prevertices().ok_or_else(|| Error::NotSupported("strip chart needs half-plane data".into()))?;
    let up: Vec<f64> = p.iter().map(|t| ((1.0 - t) / (1.0 + t)).ln()).collect();
    let x = 2.0 * PI * opts.extent;
    let core = up.iter().fold(0.0f64, |a, b| a.max(b.abs())) + 1.0;
    if core >= x {
        return Err(Error::Geometry(format!("end truncation {x} inside the prevertex range {core}")));
    }
    let n = 2 * opts.resolution.div_ceil(2).max(1);
    let mut specials = up.clone();
    if !specials.iter().any(|u| *u == 0.0) {
        specials.push(0.0);
    }
    let us = axis_nodes(&base_u(x, n), &specials, opts.graded);
    let nvc = (n / 2).max(1);
    let base_v: Vec<f64> = (0..=nvc).map(|k| PI * k as f64 / nvc as f64).collect();
    let vs = axis_nodes(&base_v, &[0.0, PI], opts.graded);
    let find = |target: f64| -> usize {
        us.iter().enumerate().min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs())).map(|(i, _)| i).unwrap()
    };
    let p_columns: Vec<usize> = up.iter().map(|u| find(*u)).collect();
    let v_column = find(0.0);
    let ex = match &data.representation {
        crate::weierstrass::Representation::HalfPlane { polygon, .. } => polygon.exponents().to_vec(),
        _ => unreachable!("checked by p_prevertices"),
    };
    let p_sigma = ex[1..ex.len() - 1].to_vec();
    Ok(StripLayout { us, vs, p_columns, v_column, p_sigma })
}

/// Quarter patch with default options.
pub fn integrate_patch(data: &WeierstrassData, resolution: usize) -> Result<SurfaceMesh> {
    integrate_patch_with(data, &PatchOptions::new(resolution))
}

/// Sample the quarter patch on a graded grid of the strip chart and
/// integrate the immersion along every grid edge.
///
/// Positions follow a spanning tree of grid edges; every grid cell is then
/// checked for closure. `V` is placed at the origin.
pub fn integrate_patch_with(data: &WeierstrassData, opts: &PatchOptions) -> Result<SurfaceMesh> {
    if opts.resolution == 0 {
        return Err(Error::Domain("resolution must be positive".into()));
    }
    let data = data.half_plane()?;
    let lay = strip_layout(&data, opts)?;
    let (nu, nv) = (lay.us.len(), lay.vs.len());
    let f = |z: Complex64| data.forms_strip(z);

    // Horizontal edges (i, j) -> (i + 1, j) and vertical edges (i, j) -> (i, j + 1).
    let horizontal: Vec<Forms> = (0..(nu - 1) * nv)
        .into_par_iter()
        .map(|e| {
            let (i, j) = (e / nv, e % nv);
            edge_integral(&f, lay.node(i, j), lay.node(i + 1, j), lay.singular(i, j), lay.singular(i + 1, j))
        })
        .collect();
    let vertical: Vec<Forms> = (0..nu * (nv - 1))
        .into_par_iter()
        .map(|e| {
            let (i, j) = (e / (nv - 1), e % (nv - 1));
            edge_integral(&f, lay.node(i, j), lay.node(i, j + 1), lay.singular(i, j), lay.singular(i, j + 1))
        })
        .collect();
    let h = |i: usize, j: usize| -> [f64; 3] {
        let v = &horizontal[i * nv + j];
        [v[0].re, v[1].re, v[2].re]
    };
    let vv = |i: usize, j: usize| -> [f64; 3] {
        let v = &vertical[i * (nv - 1) + j];
        [v[0].re, v[1].re, v[2].re]
    };

    // Spanning tree: along the bottom row from V, then up every column.
    let mut pos = vec![[0.0; 3]; nu * nv];
    let i0 = lay.v_column;
    for i in i0..nu - 1 {
        pos[lay.index(i + 1, 0)] = add(pos[lay.index(i, 0)], h(i, 0));
    }
    for i in (0..i0).rev() {
        pos[lay.index(i, 0)] = sub(pos[lay.index(i + 1, 0)], h(i, 0));
    }
    for i in 0..nu {
        for j in 0..nv - 1 {
            pos[lay.index(i, j + 1)] = add(pos[lay.index(i, j)], vv(i, j));
        }
    }
    let diameter = bounding_diameter(&pos);
    let mut worst = 0.0f64;
    for i in 0..nu - 1 {
        for j in 0..nv - 1 {
            let s = sub(add(h(i, j), vv(i + 1, j)), add(h(i, j + 1), vv(i, j)));
            worst = worst.max(norm(s));
        }
    }
    let loop_residual = worst / diameter;
    if !(loop_residual <= LOOP_TOL) {
        return Err(Error::PeriodClosure(loop_residual));
    }

    // Normals from the Gauss map; limits at the singular nodes.
    let s_v = data.exponent_at_v();
    let normals: Vec<[f64; 3]> = (0..nu * nv)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nv, idx % nv);
            if j == 0 && i == lay.v_column {
                return [0.0, 0.0, if s_v > 0.0 { 1.0 } else { -1.0 }];
            }
            if j == nv - 1 {
                if let Some(k) = lay.p_columns.iter().position(|c| *c == i) {
                    return [0.0, 0.0, if lay.p_sigma[k] > 0 { -1.0 } else { 1.0 }];
                }
            }
            stereographic_normal(data.gauss_map_strip(lay.node(i, j)))
        })
        .collect();

    let mut triangles = Vec::with_capacity(2 * (nu - 1) * (nv - 1));
    for i in 0..nu - 1 {
        for j in 0..nv - 1 {
            let a = lay.index(i, j);
            let b = lay.index(i + 1, j);
            let c = lay.index(i + 1, j + 1);
            let d = lay.index(i, j + 1);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }

    let mut arcs = Vec::new();
    let g = data.genus;
    let row = |j: usize, from: usize, to: usize| -> Vec<usize> { (from..=to).map(|i| lay.index(i, j)).collect() };
    arcs.push(BoundaryArc { label: "E1-V".into(), kind: ArcKind::Symmetry, vertices: row(0, 0, lay.v_column) });
    arcs.push(BoundaryArc { label: "V-E2".into(), kind: ArcKind::Symmetry, vertices: row(0, lay.v_column, nu - 1) });
    // Top row from left (E_1) to right (E_2): P_2g, ..., P_0.
    let mut cols = vec![0usize];
    cols.extend(lay.p_columns.iter().rev().copied());
    cols.push(nu - 1);
    let mut names = vec!["E1".to_string()];
    names.extend((0..=2 * g).rev().map(|j| format!("P{j}")));
    names.push("E2".into());
    for k in 0..cols.len() - 1 {
        arcs.push(BoundaryArc {
            label: format!("{}-{}", names[k], names[k + 1]),
            kind: ArcKind::Symmetry,
            vertices: row(nv - 1, cols[k], cols[k + 1]),
        });
    }
    arcs.push(BoundaryArc { label: "E1 cut".into(), kind: ArcKind::EndCut, vertices: (0..nv).map(|j| lay.index(0, j)).collect() });
    arcs.push(BoundaryArc {
        label: "E2 cut".into(),
        kind: ArcKind::EndCut,
        vertices: (0..nv).map(|j| lay.index(nu - 1, j)).collect(),
    });

    let conical: Vec<Complex64> = lay
        .p_columns
        .iter()
        .map(|i| lay.node(*i, nv - 1))
        .chain(std::iter::once(lay.node(lay.v_column, 0)))
        .collect();
    let regular: Vec<bool> = (0..nu * nv)
        .map(|idx| {
            let z = lay.node(idx / nv, idx % nv);
            conical.iter().all(|c| (z - c).norm() >= CONICAL_RADIUS)
        })
        .collect();
    let mut mesh = SurfaceMesh {
        regular,
        vertices: pos,
        normals,
        triangles,
        lattice: [[0.0; 3]; 2],
        tags: vec![
            format!("genus={g}"),
            format!("associate={}", data.associate),
            format!("resolution={}", opts.resolution),
            format!("grid={nu}x{nv}"),
            "patch=quarter".into(),
        ],
        arcs,
        loop_residual,
    };
    if data.associate.rem_euclid(2.0 * PI).abs() < 1e-12 {
        if let Ok(w) = symmetry_walls(&mesh) {
            mesh.lattice = w.lattice;
        }
    }
    Ok(mesh)
}

fn bounding_diameter(pos: &[[f64; 3]]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in pos {
        for c in 0..3 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    norm(sub(hi, lo)).max(f64::MIN_POSITIVE)
}

impl SurfaceMesh {
    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        bounding_diameter(&self.vertices)
    }

    /// Arc by label.
    pub fn arc(&self, label: &str) -> Option<&BoundaryArc> {
        self.arcs.iter().find(|a| a.label == label)
    }

    /// Unit normals of the triangles.
    pub fn face_normals(&self) -> Vec<[f64; 3]> {
        self.triangles
            .iter()
            .map(|t| {
                let n = cross(sub(self.vertices[t[1]], self.vertices[t[0]]), sub(self.vertices[t[2]], self.vertices[t[0]]));
                let l = norm(n);
                if l > 0.0 {
                    scale(n, 1.0 / l)
                } else {
                    n
                }
            })
            .collect()
    }

    /// Area-weighted vertex normals computed from the triangles alone.
    pub fn geometric_normals(&self) -> Vec<[f64; 3]> {
        let mut acc = vec![[0.0; 3]; self.vertices.len()];
        for t in &self.triangles {
            let n = cross(sub(self.vertices[t[1]], self.vertices[t[0]]), sub(self.vertices[t[2]], self.vertices[t[0]]));
            for &v in t {
                acc[v] = add(acc[v], n);
            }
        }
        acc.into_iter()
            .map(|n| {
                let l = norm(n);
                if l > 0.0 {
                    scale(n, 1.0 / l)
                } else {
                    n
                }
            })
            .collect()
    }

    /// Indices of vertices on boundary edges.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for (e, c) in edge_counts(&self.triangles) {
            if c == 1 {
                on[e.0] = true;
                on[e.1] = true;
            }
        }
        on
    }
}

fn edge_counts(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut m = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    m
}

/// Vertical plane `n . x = c` fitted to a polyline, with the largest
/// distance of a vertex from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerticalPlane {
    /// Horizontal unit normal.
    pub normal: [f64; 3],
    /// Offset.
    pub offset: f64,
    /// Largest vertex distance from the plane.
    pub deviation: f64,
}

/// Best vertical plane through the given points (horizontal principal axis).
pub fn fit_vertical_plane(points: &[[f64; 3]]) -> VerticalPlane {
    let n = points.len().max(1) as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p[0] / n, a.1 + p[1] / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // Direction of least horizontal spread.
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy) + 0.5 * PI;
    let mut normal = [angle.cos(), angle.sin(), 0.0];
    // Canonical sign: largest component positive.
    if normal[0].abs() >= normal[1].abs() && normal[0] < 0.0 || normal[1].abs() > normal[0].abs() && normal[1] < 0.0 {
        normal = scale(normal, -1.0);
    }
    let offset = normal[0] * mx + normal[1] * my;
    let deviation = points.iter().map(|p| (dot(normal, *p) - offset).abs()).fold(0.0, f64::max);
    VerticalPlane { normal, offset, deviation }
}

/// Largest distance of a polyline's vertices from the straight line through
/// its endpoints, and the spread of its heights.
pub fn line_deviation(points: &[[f64; 3]]) -> (f64, f64) {
    if points.len() < 2 {
        return (0.0, 0.0);
    }
    let a = points[0];
    let b = *points.last().unwrap();
    let d = sub(b, a);
    let l = norm(d);
    let dev = points
        .iter()
        .map(|p| {
            let w = sub(*p, a);
            if l > 0.0 {
                norm(cross(w, d)) / l
            } else {
                norm(w)
            }
        })
        .fold(0.0, f64::max);
    let (zlo, zhi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |s, p| (s.0.min(p[2]), s.1.max(p[2])));
    (dev, zhi - zlo)
}

/// The two reflection planes through `V`, the walls of the box containing
/// the quarter patch, and the lattice they generate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryWalls {
    /// Plane of the arc `E1-V`.
    pub first: VerticalPlane,
    /// Plane of the arc `V-E2`.
    pub second: VerticalPlane,
    /// Offsets of the opposite walls (parallel to `first`, `second`).
    pub opposite: [f64; 2],
    /// Largest distance of a symmetry arc from its wall, including the
    /// disagreement of parallel arcs on the same wall.
    pub gap: f64,
    /// Lattice generators `2 (opposite - offset) normal`.
    pub lattice: [[f64; 3]; 2],
}

/// Locate the symmetry walls of a quarter patch.
pub fn symmetry_walls(patch: &SurfaceMesh) -> Result<SymmetryWalls> {
    let pts = |a: &BoundaryArc| -> Vec<[f64; 3]> { a.vertices.iter().map(|i| patch.vertices[*i]).collect() };
    let first_arc = patch.arc("E1-V").ok_or_else(|| Error::Assembly(f64::INFINITY))?;
    let second_arc = patch.arc("V-E2").ok_or_else(|| Error::Assembly(f64::INFINITY))?;
    let first = fit_vertical_plane(&pts(first_arc));
    let second = fit_vertical_plane(&pts(second_arc));
    let mut gap = first.deviation.max(second.deviation);
    let mut offsets: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for a in patch.arcs.iter().filter(|a| a.kind == ArcKind::Symmetry && a.label != "E1-V" && a.label != "V-E2") {
        let p = pts(a);
        let plane = fit_vertical_plane(&p);
        let which = if dot(plane.normal, first.normal).abs() > dot(plane.normal, second.normal).abs() { 0 } else { 1 };
        let base = if which == 0 { &first } else { &second };
        for q in &p {
            offsets[which].push(dot(base.normal, *q));
        }
    }
    let mut opposite = [0.0; 2];
    for k in 0..2 {
        if offsets[k].is_empty() {
            return Err(Error::Assembly(f64::INFINITY));
        }
        let lo = offsets[k].iter().copied().fold(f64::INFINITY, f64::min);
        let hi = offsets[k].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        opposite[k] = 0.5 * (lo + hi);
        gap = gap.max(hi - lo);
    }
    let lattice = [
        scale(first.normal, 2.0 * (opposite[0] - first.offset)),
        scale(second.normal, 2.0 * (opposite[1] - second.offset)),
    ];
    Ok(SymmetryWalls { first, second, opposite, gap, lattice })
}

fn reflect(p: [f64; 3], plane: &VerticalPlane) -> [f64; 3] {
    let d = dot(plane.normal, p) - plane.offset;
    sub(p, scale(plane.normal, 2.0 * d))
}

fn reflect_vector(v: [f64; 3], plane: &VerticalPlane) -> [f64; 3] {
    sub(v, scale(plane.normal, 2.0 * dot(plane.normal, v)))
}

/// Merge vertices closer than `tol` after mapping positions with `key`.
fn weld(positions: &[[f64; 3]], tol: f64) -> (Vec<usize>, usize) {
    let cell = |p: &[f64; 3]| -> (i64, i64, i64) {
        ((p[0] / tol).floor() as i64, (p[1] / tol).floor() as i64, (p[2] / tol).floor() as i64)
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut map = vec![0usize; positions.len()];
    let mut reps: Vec<usize> = Vec::new();
    for (i, p) in positions.iter().enumerate() {
        let c = cell(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&(c.0 + dx, c.1 + dy, c.2 + dz)) {
                        for &r in list {
                            if norm(sub(positions[reps[r]], *p)) <= tol {
                                found = Some(r);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        let r = match found {
            Some(r) => r,
            None => {
                reps.push(i);
                grid.entry(c).or_default().push(reps.len() - 1);
                reps.len() - 1
            }
        };
        map[i] = r;
    }
    (map, reps.len())
}

/// Reflect the quarter patch across its two vertical planes through `V` into
/// a fundamental domain, translate by `extent[0] x extent[1]` lattice cells
/// and weld the seams.
pub fn assemble(patch: &SurfaceMesh, extent: [usize; 2]) -> Result<SurfaceMesh> {
    if extent[0] == 0 || extent[1] == 0 {
        return Err(Error::Domain("assembly extent must be positive".into()));
    }
    let walls = symmetry_walls(patch)?;
    let diameter = patch.diameter();
    if walls.gap > 1e-6 * diameter {
        return Err(Error::Assembly(walls.gap));
    }
    let mut vertices = Vec::new();
    let mut normals = Vec::new();
    let mut regular = Vec::new();
    let mut triangles = Vec::new();
    // Fixed seam order: identity, first, second, both reflections.
    let copies: [(bool, bool); 4] = [(false, false), (true, false), (false, true), (true, true)];
    for a in 0..extent[0] {
        for b in 0..extent[1] {
            let shift = add(scale(walls.lattice[0], a as f64), scale(walls.lattice[1], b as f64));
            for &(r1, r2) in &copies {
                let base = vertices.len();
                for (p, n) in patch.vertices.iter().zip(&patch.normals) {
                    let (mut p, mut n) = (*p, *n);
                    if r1 {
                        p = reflect(p, &walls.first);
                        n = reflect_vector(n, &walls.first);
                    }
                    if r2 {
                        p = reflect(p, &walls.second);
                        n = reflect_vector(n, &walls.second);
                    }
                    vertices.push(add(p, shift));
                    normals.push(n);
                }
                regular.extend((0..patch.vertices.len()).map(|i| patch.regular.get(i).copied().unwrap_or(true)));
                let flip = r1 != r2;
                for t in &patch.triangles {
                    let t = if flip { [t[0], t[2], t[1]] } else { *t };
                    triangles.push([base + t[0], base + t[1], base + t[2]]);
                }
            }
        }
    }
    let (map, count) = weld(&vertices, 1e-7 * diameter);
    let mut wv = vec![[0.0; 3]; count];
    let mut wn = vec![[0.0; 3]; count];
    let mut wr = vec![true; count];
    for (i, &m) in map.iter().enumerate() {
        wv[m] = vertices[i];
        wn[m] = normals[i];
        wr[m] &= regular[i];
    }
    let triangles = triangles.into_iter().map(|t| [map[t[0]], map[t[1]], map[t[2]]]).collect();
    let mut tags = patch.tags.clone();
    tags.retain(|t| !t.starts_with("patch="));
    tags.push(format!("patch=assembled {}x{}", extent[0], extent[1]));
    tags.push(format!("seam_gap={:e}", walls.gap));
    Ok(SurfaceMesh { vertices: wv, normals: wn, triangles, lattice: walls.lattice, tags, arcs: vec![], loop_residual: patch.loop_residual, regular: wr })
}

/// `V - E + F` of a mesh.
pub fn euler_characteristic(mesh: &SurfaceMesh) -> i64 {
    let used: std::collections::HashSet<usize> = mesh.triangles.iter().flatten().copied().collect();
    used.len() as i64 - edge_counts(&mesh.triangles).len() as i64 + mesh.triangles.len() as i64
}

/// Euler characteristic of the quotient of an assembled mesh by its period
/// lattice, obtained by welding vertices modulo the lattice.
pub fn quotient_euler_characteristic(mesh: &SurfaceMesh) -> Result<i64> {
    let [a, b] = mesh.lattice;
    let det = a[0] * b[1] - a[1] * b[0];
    if det.abs() < 1e-300 {
        return Err(Error::Geometry("mesh has no period lattice".into()));
    }
    let diameter = mesh.diameter();
    let tol = 1e-7 * diameter;
    let reduced: Vec<[f64; 3]> = mesh
        .vertices
        .iter()
        .map(|p| {
            let s = (p[0] * b[1] - p[1] * b[0]) / det;
            let t = (a[0] * p[1] - a[1] * p[0]) / det;
            let wrap = |x: f64, len: f64| -> f64 {
                let f = x.rem_euclid(1.0);
                if (1.0 - f) * len < tol {
                    0.0
                } else {
                    f
                }
            };
            let (s, t) = (wrap(s, norm(a)), wrap(t, norm(b)));
            [s * a[0] + t * b[0], s * a[1] + t * b[1], p[2]]
        })
        .collect();
    let (map, count) = weld(&reduced, tol);
    let tris: Vec<[usize; 3]> = mesh.triangles.iter().map(|t| [map[t[0]], map[t[1]], map[t[2]]]).collect();
    Ok(count as i64 - edge_counts(&tris).len() as i64 + tris.len() as i64)
}

/// Direction whose orthogonal plane the conjugate quarters are graphs over.
pub const CONJUGATE_GRAPH_DIRECTION: [f64; 3] = [1.0, 1.0, 0.0];

/// Outcome of [`graph_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphCheck {
    /// The projection along the direction is injective.
    pub is_graph: bool,
    /// Smallest projected distance between non-adjacent boundary segments,
    /// relative to the diameter (negative if two segments cross).
    pub min_separation: f64,
    /// Triangles whose projected orientation disagrees with the majority.
    pub flipped: usize,
}

fn segments_distance(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> f64 {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let (d1, d2, d3, d4) = (orient(r, s, p), orient(r, s, q), orient(p, q, r), orient(p, q, s));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return -1.0;
    }
    let point_seg = |x: [f64; 2], a: [f64; 2], b: [f64; 2]| -> f64 {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let l2 = dx * dx + dy * dy;
        let t = if l2 > 0.0 { (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
        ((x[0] - a[0] - t * dx).powi(2) + (x[1] - a[1] - t * dy).powi(2)).sqrt()
    };
    point_seg(p, r, s).min(point_seg(q, r, s)).min(point_seg(r, p, q)).min(point_seg(s, p, q))
}

/// Boundary loops of a triangulated surface as vertex cycles.
pub fn boundary_loops(mesh: &SurfaceMesh) -> Result<Vec<Vec<usize>>> {
    let counts = edge_counts(&mesh.triangles);
    if counts.values().any(|c| *c > 2) {
        return Err(Error::Geometry("non-manifold edge".into()));
    }
    // Directed boundary edges in triangle order.
    let mut next: HashMap<usize, usize> = HashMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if counts[&(a.min(b), a.max(b))] == 1 && next.insert(a, b).is_some() {
                return Err(Error::Geometry("non-manifold boundary vertex".into()));
            }
        }
    }
    let mut loops = Vec::new();
    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut seen = std::collections::HashSet::new();
    for s in starts {
        if seen.contains(&s) {
            continue;
        }
        let mut cyc = vec![s];
        seen.insert(s);
        let mut c = next[&s];
        while c != s {
            if !seen.insert(c) {
                return Err(Error::Geometry("boundary is not a union of cycles".into()));
            }
            cyc.push(c);
            c = *next.get(&c).ok_or_else(|| Error::Geometry("open boundary chain".into()))?;
        }
        loops.push(cyc);
    }
    Ok(loops)
}

/// Test whether a disk-type patch is a graph over the plane orthogonal to
/// `direction`: every projected triangle has the same orientation and the
/// projected boundary is a simple closed curve.
pub fn graph_check(patch: &SurfaceMesh, direction: [f64; 3]) -> Result<GraphCheck> {
    let d = scale(direction, 1.0 / norm(direction));
    // Orthonormal basis of the projection plane.
    let helper = if d[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let e2 = {
        let w = sub(helper, scale(d, dot(helper, d)));
        scale(w, 1.0 / norm(w))
    };
    let e1 = cross(e2, d);
    let proj: Vec<[f64; 2]> = patch.vertices.iter().map(|p| [dot(*p, e1), dot(*p, e2)]).collect();
    let diameter = patch.diameter();
    let area_floor = 1e-14 * diameter * diameter;
    let mut pos = 0usize;
    let mut neg = 0usize;
    let mut flat = 0usize;
    for t in &patch.triangles {
        let (a, b, c) = (proj[t[0]], proj[t[1]], proj[t[2]]);
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
        if area > area_floor {
            pos += 1;
        } else if area < -area_floor {
            neg += 1;
        } else {
            flat += 1;
        }
    }
    let flipped = pos.min(neg) + flat;
    let loops = boundary_loops(patch)?;
    let mut min_sep = f64::INFINITY;
    if loops.len() != 1 {
        return Ok(GraphCheck { is_graph: false, min_separation: f64::NAN, flipped });
    }
    let b = &loops[0];
    let m = b.len();
    for i in 0..m {
        let (p, q) = (proj[b[i]], proj[b[(i + 1) % m]]);
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            let (r, s) = (proj[b[j]], proj[b[(j + 1) % m]]);
            let dist = segments_distance(p, q, r, s);
            min_sep = min_sep.min(dist);
            if dist < 0.0 {
                break;
            }
        }
        if min_sep < 0.0 {
            break;
        }
    }
    let min_separation = if min_sep < 0.0 { -1.0 } else { min_sep / diameter };
    Ok(GraphCheck { is_graph: flipped == 0 && min_sep > 0.0, min_separation, flipped })
}

/// Per-vertex magnitude of the cotangent Laplacian of the position divided
/// by the barycentric vertex area (`k_1 + k_2` for a smooth surface); zero
/// on boundary vertices and on vertices not flagged regular.
pub fn mean_curvature_field(mesh: &SurfaceMesh) -> Result<Vec<f64>> {
    let counts = edge_counts(&mesh.triangles);
    if counts.values().any(|c| *c > 2) {
        return Err(Error::Geometry("non-manifold edge".into()));
    }
    let n = mesh.vertices.len();
    let mut lap = vec![[0.0; 3]; n];
    let mut area = vec![0.0; n];
    for t in &mesh.triangles {
        let p = [mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]];
        let a = 0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])));
        for k in 0..3 {
            area[t[k]] += a / 3.0;
            // Angle at vertex k weighs the opposite edge.
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let u = sub(p[i], p[k]);
            let v = sub(p[j], p[k]);
            let cr = norm(cross(u, v));
            let cot = if cr > 0.0 { dot(u, v) / cr } else { 0.0 };
            let w = 0.5 * cot;
            let d = sub(p[j], p[i]);
            lap[t[i]] = add(lap[t[i]], scale(d, w));
            lap[t[j]] = sub(lap[t[j]], scale(d, w));
        }
    }
    let boundary = mesh.boundary_vertices();
    let skip = |v: usize| boundary[v] || area[v] == 0.0 || !mesh.regular.get(v).copied().unwrap_or(true);
    Ok((0..n).map(|v| if skip(v) { 0.0 } else { norm(lap[v]) / area[v] }).collect())
}

/// Largest discrete mean curvature `|k_1 + k_2|` over interior regular
/// vertices (cotangent formula with barycentric areas).
pub fn mean_curvature_residual(mesh: &SurfaceMesh) -> Result<f64> {
    Ok(mean_curvature_field(mesh)?.into_iter().fold(0.0, f64::max))
}

fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Write a Wavefront OBJ with positions, normals and 1-based faces.
pub fn write_obj<W: Write>(mesh: &SurfaceMesh, mut w: W) -> Result<()> {
    for t in &mesh.tags {
        writeln!(w, "# {t}")?;
    }
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", sig12(v[0]), sig12(v[1]), sig12(v[2]))?;
    }
    for n in &mesh.normals {
        writeln!(w, "vn {} {} {}", sig12(n[0]), sig12(n[1]), sig12(n[2]))?;
    }
    for t in &mesh.triangles {
        let (a, b, c) = (t[0] + 1, t[1] + 1, t[2] + 1);
        writeln!(w, "f {a}//{a} {b}//{b} {c}//{c}")?;
    }
    Ok(())
}

/// Write a binary little-endian PLY with double-precision positions and
/// normals; tags become header comments.
pub fn write_ply<W: Write>(mesh: &SurfaceMesh, mut w: W) -> Result<()> {
    write!(w, "ply\nformat binary_little_endian 1.0\n")?;
    for t in &mesh.tags {
        writeln!(w, "comment {}", t.replace('\n', " "))?;
    }
    write!(
        w,
        "element vertex {}\nproperty double x\nproperty double y\nproperty double z\nproperty double nx\nproperty double ny\nproperty double nz\nelement face {}\nproperty list uchar uint vertex_indices\nend_header\n",
        mesh.vertices.len(),
        mesh.triangles.len()
    )?;
    for (v, n) in mesh.vertices.iter().zip(&mesh.normals) {
        for x in v.iter().chain(n.iter()) {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    for t in &mesh.triangles {
        w.write_all(&[3u8])?;
        for &i in t {
            let i = u32::try_from(i).map_err(|_| Error::Io("vertex index exceeds PLY range".into()))?;
            w.write_all(&i.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Save as OBJ or PLY depending on the file extension.
pub fn save_mesh(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match path.extension().and_then(|e| e.to_str()) {
        Some("ply") => write_ply(mesh, file),
        _ => write_obj(mesh, file),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_mesh(n: usize, f: impl Fn(f64, f64) -> [f64; 3]) -> SurfaceMesh {
        let mut vertices = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                vertices.push(f(i as f64 / n as f64, j as f64 / n as f64));
            }
        }
        let idx = |i: usize, j: usize| i * (n + 1) + j;
        let mut triangles = Vec::new();
        for i in 0..n {
            for j in 0..n {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        let normals = vec![[0.0, 0.0, 1.0]; vertices.len()];
        SurfaceMesh { vertices, normals, triangles, lattice: [[0.0; 3]; 2], tags: vec![], arcs: vec![], loop_residual: 0.0, regular: vec![] }
    }

    #[test]
    fn flat_grid_has_zero_mean_curvature() {
        let m = grid_mesh(12, |u, v| [u, v, 0.0]);
        assert!(mean_curvature_residual(&m).unwrap() < 1e-12);
        assert_eq!(euler_characteristic(&m), 1);
    }

    #[test]
    fn sphere_control_gives_two_over_radius() {
        let r = 2.5;
        let m = grid_mesh(80, |u, v| {
            let (th, ph) = (0.6 + 1.9 * u, 2.0 * v);
            [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]
        });
        let field = mean_curvature_field(&m).unwrap();
        let interior: Vec<f64> = field.into_iter().filter(|x| *x > 0.0).collect();
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        assert!((mean - 2.0 / r).abs() < 1e-2 * 2.0 / r, "{mean}");
    }

    #[test]
    fn folded_sheet_is_not_a_graph() {
        let flat = grid_mesh(10, |u, v| [u, -u, v]);
        let g = graph_check(&flat, [1.0, 1.0, 0.0]).unwrap();
        assert!(g.is_graph && g.min_separation > 0.0);
        let folded = grid_mesh(10, |u, v| {
            let s = if u < 0.6 { u } else { 1.2 - u };
            [s, -s, v]
        });
        assert!(!graph_check(&folded, [1.0, 1.0, 0.0]).unwrap().is_graph);
    }

    #[test]
    fn exports_round_trip_sizes() {
        let m = grid_mesh(3, |u, v| [u, v, u * v]);
        let mut obj = Vec::new();
        write_obj(&m, &mut obj).unwrap();
        let text = String::from_utf8(obj).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 16);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 18);
        let mut ply = Vec::new();
        write_ply(&m, &mut ply).unwrap();
        let header_end = ply.windows(11).position(|w| w == b"end_header\n").unwrap() + 11;
        assert_eq!(ply.len() - header_end, 16 * 48 + 18 * 13);
    }

    #[test]
    fn graded_axis_contains_specials_and_rings() {
        let base: Vec<f64> = (0..=8).map(|k| -4.0 + k as f64).collect();
        let nodes = axis_nodes(&base, &[0.3], true);
        assert!(nodes.contains(&0.3));
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        let closest = nodes.iter().filter(|x| **x != 0.3).map(|x| (x - 0.3).abs()).fold(f64::INFINITY, f64::min);
        assert!((closest - GRADING_RATIO.powi(GRADING_RINGS as i32)).abs() < 1e-12, "{closest}");
    }

    #[test]
    fn smooth_axis_is_warped_onto_specials() {
        let base = base_u(10.0, 64);
        let specials = [-1.7, 0.0, 2.3];
        let nodes = axis_nodes(&base, &specials, false);
        assert_eq!(nodes.len(), base.len());
        for s in specials {
            assert!(nodes.contains(&s));
        }
        // Spacing ratios stay close to those of the base grid: no kinks.
        let ratio = |v: &[f64]| -> Vec<f64> { v.windows(3).map(|w| (w[2] - w[1]) / (w[1] - w[0])).collect() };
        let worst = ratio(&nodes).iter().zip(ratio(&base)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 0.05, "{worst}");
        // Competing specials fall back to snapping.
        assert!(warped_nodes(&base, &[0.0, 1e-3]).is_none());
    }

    #[test]
    fn spline_reproduces_lines() {
        let x = [0.0, 1.0, 2.5, 4.0];
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t - 1.0).collect();
        let v = natural_spline(&x, &y, &[0.5, 3.0]);
        assert!((v[0] - 0.0).abs() < 1e-14 && (v[1] - 5.0).abs() < 1e-14);
    }
}
