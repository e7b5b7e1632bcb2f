//! Weierstrass data `(G, dh)` of the quarter patch, period verification and
//! the associate family.
//!
//! Two representations are supported. The classical Scherk surfaces use the
//! four-punctured sphere with `G = z` and
//! `dh = i z dz / (z^4 - 2 cos(theta) z^2 + 1)`, where `theta` is the angle
//! of the period lattice. Surfaces with handles live on the upper half-plane
//! of a solved reflexive pair: `Gdh` and `G^-1 dh` are the two
//! Schwarz-Christoffel integrands on the common prevertices, so that
//! `G = lambda prod (t - p_j)^(sigma_j / 2)` and `dh = K dt / (t^2 - 1)`.
//!
//! The immersion is `Re int (omega_1, omega_2, omega_3)` with
//! `omega_1 = (G^-1 - G) dh / 2`, `omega_2 = i (G^-1 + G) dh / 2` and
//! `omega_3 = dh`.

use crate::error::{Error, Result};
use crate::genus1::Domain;
use crate::height_solver::{solve_genus1_coords, FittedPair};
use crate::orthodisk::{vertex_exponents, GeometricCoords};
use crate::scmap::{branch_arg, cycle_period, ConformalPolygon, Cycle};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Largest relative disagreement of the two fitted prevertex sets accepted
/// as the same half-plane.
pub const REFLEXIVE_TOL: f64 = 1e-6;

/// The Riemann surface and formulas carrying the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Representation {
    /// Classical Scherk surface on the four-punctured sphere, `G = z`.
    PuncturedSphere {
        /// Angle between the lattice generators, in `(0, pi/2]`.
        theta: f64,
    },
    /// Quarter patch on the upper half-plane with `E_2 = -1`, `E_1 = 1` and
    /// `V` at infinity.
    HalfPlane {
        /// Prevertices `E_2, P_0, ..., P_2g, E_1` with the `Gdh` exponents.
        polygon: ConformalPolygon,
        /// Constant factor of the Gauss map.
        lambda: Complex64,
        /// Real factor of `dh = K dt / (t^2 - 1)`.
        k: f64,
    },
}

/// A puncture of the quotient surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct End {
    /// Position in the native coordinate.
    pub point: Complex64,
    /// Residue of `dh` (real).
    pub residue: f64,
}

/// Gauss map and height differential with the associate-family angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassData {
    /// Number of handles.
    pub genus: usize,
    /// Underlying representation.
    pub representation: Representation,
    /// Associate-family angle `t`; all coordinate forms carry `e^{it}`.
    pub associate: f64,
}

/// Unit normal from the Gauss map by inverse stereographic projection.
pub fn stereographic_normal(g: Complex64) -> [f64; 3] {
    let m = g.norm_sqr();
    if !m.is_finite() {
        return [0.0, 0.0, 1.0];
    }
    if m > 1.0 {
        // Same formula in terms of 1/G, stable for large |G|.
        let h = g.inv();
        let q = h.norm_sqr();
        let d = 1.0 + q;
        return [2.0 * h.re / d, -2.0 * h.im / d, (1.0 - q) / d];
    }
    let d = 1.0 + m;
    [2.0 * g.re / d, 2.0 * g.im / d, (m - 1.0) / d]
}

fn expm1_complex(z: Complex64) -> Complex64 {
    let s = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * z.im.cos() - 2.0 * s * s, z.re.exp() * z.im.sin())
}

impl WeierstrassData {
    /// Gauss map at a point of the native coordinate.
    pub fn gauss_map(&self, z: Complex64) -> Complex64 {
        match &self.representation {
            Representation::PuncturedSphere { .. } => z,
            Representation::HalfPlane { polygon, lambda, .. } => {
                let pts = polygon.prevertices();
                let ex = polygon.exponents();
                let n = pts.len();
                let (mut lm, mut ph) = (0.0, 0.0);
                for i in 1..n - 1 {
                    let d = z - pts[i];
                    let e = 0.5 * ex[i] as f64;
                    lm += e * d.norm().ln();
                    ph += e * branch_arg(d);
                }
                lambda * Complex64::from_polar(lm.exp(), ph)
            }
        }
    }

    /// Coefficient of `dh` with respect to the native coordinate.
    pub fn dh(&self, z: Complex64) -> Complex64 {
        match &self.representation {
            Representation::PuncturedSphere { theta } => {
                let z2 = z * z;
                Complex64::i() * z / (z2 * z2 - 2.0 * theta.cos() * z2 + 1.0)
            }
            Representation::HalfPlane { k, .. } => *k / (z * z - 1.0),
        }
    }

    /// Coefficient of `G dh`.
    pub fn gdh(&self, z: Complex64) -> Complex64 {
        self.gauss_map(z) * self.dh(z)
    }

    /// Coefficient of `G^-1 dh`.
    pub fn ginvdh(&self, z: Complex64) -> Complex64 {
        self.dh(z) / self.gauss_map(z)
    }

    /// Coefficients of `e^{it} (omega_1, omega_2, omega_3)`.
    pub fn forms(&self, z: Complex64) -> [Complex64; 3] {
        coordinate_forms(self.gauss_map(z), self.dh(z) * Complex64::from_polar(1.0, self.associate))
    }

    /// Ends with their `dh` residues.
    pub fn ends(&self) -> Vec<End> {
        match &self.representation {
            Representation::PuncturedSphere { theta } => {
                let r = 1.0 / (4.0 * theta.sin());
                let q = Complex64::from_polar(1.0, 0.5 * theta);
                let qc = Complex64::from_polar(1.0, PI - 0.5 * theta);
                vec![
                    End { point: q, residue: r },
                    End { point: qc, residue: -r },
                    End { point: -q, residue: r },
                    End { point: -qc, residue: -r },
                ]
            }
            Representation::HalfPlane { k, .. } => vec![
                End { point: Complex64::new(1.0, 0.0), residue: 0.5 * k },
                End { point: Complex64::new(-1.0, 0.0), residue: -0.5 * k },
            ],
        }
    }

    /// Half-plane representation of the same surface, rotated about the
    /// vertical axis so that its symmetry planes are coordinate planes.
    ///
    /// The punctured sphere with a square lattice maps to the half-plane by
    /// `z^2 = i t`; other lattice angles are not supported.
    pub fn half_plane(&self) -> Result<WeierstrassData> {
        match &self.representation {
            Representation::HalfPlane { .. } => Ok(self.clone()),
            Representation::PuncturedSphere { theta } => {
                if (theta - FRAC_PI_2).abs() > 1e-12 {
                    return Err(Error::NotSupported(format!(
                        "half-plane chart of the sheared Scherk surface (theta = {theta})"
                    )));
                }
                let ex = vertex_exponents(0, Domain::Gdh);
                let polygon = ConformalPolygon::new(&[-1.0, 0.0, 1.0], &ex.finite, ex.at_infinity, vec![]);
                Ok(WeierstrassData {
                    genus: 0,
                    representation: Representation::HalfPlane { polygon, lambda: Complex64::new(1.0, 0.0), k: 0.5 },
                    associate: self.associate,
                })
            }
        }
    }

    /// Prevertex positions `t` of `P_0, ..., P_2g` (half-plane data only).
    pub fn p_prevertices(&self) -> Option<Vec<f64>> {
        match &self.representation {
            Representation::HalfPlane { polygon, .. } => {
                let p = polygon.prevertices();
                Some(p[1..p.len() - 1].to_vec())
            }
            Representation::PuncturedSphere { .. } => None,
        }
    }
}

/// `(omega_1, omega_2, omega_3)` from `G` and an already rotated `dh`.
pub fn coordinate_forms(g: Complex64, dh: Complex64) -> [Complex64; 3] {
    let gi = g.inv();
    let i = Complex64::i();
    [0.5 * (gi - g) * dh, 0.5 * i * (gi + g) * dh, dh]
}

/// Closed-form Weierstrass data of the classical Scherk surface whose period
/// lattice has angle `phi` (`phi = pi/2` is the square lattice).
pub fn genus0_data(phi: f64) -> Result<WeierstrassData> {
    if !(phi > 0.0 && phi <= FRAC_PI_2 + 1e-15) {
        return Err(Error::Domain(format!("lattice angle {phi} outside (0, pi/2]")));
    }
    Ok(WeierstrassData { genus: 0, representation: Representation::PuncturedSphere { theta: phi }, associate: 0.0 })
}

/// Weierstrass data on the common half-plane of a solved reflexive pair.
///
/// The `Gdh` integrand is `lambda K` times the fitted `Gdh` integrand and the
/// `G^-1 dh` integrand is `K / lambda` times the same prevertices with
/// negated `P` exponents; `|lambda|^2 = s_1 / s_2` and `K = sqrt(s_1 s_2)` for
/// the fitted scale factors, which makes the developed domains congruent to
/// the staircases. The phase of `lambda` is `i^(g mod 2)`: the symmetry planes are
/// then coordinate planes and, for every genus, the quarter patch lies in
/// the box `{x > 0, y < 0}` with `V` at its corner.
pub fn recover_data(coords: &GeometricCoords, fit: &FittedPair) -> Result<WeierstrassData> {
    let g = coords.genus;
    if fit.gdh.genus != g || fit.ginvdh.genus != g {
        return Err(Error::Contract(format!("fit genus does not match coordinates of genus {g}")));
    }
    let h1 = fit.gdh.half_gaps();
    let h2 = fit.ginvdh.half_gaps();
    let mismatch = h1.iter().zip(&h2).map(|(a, b)| (a / b).ln().abs()).fold(0.0f64, f64::max);
    if !(mismatch <= REFLEXIVE_TOL) {
        return Err(Error::Contract(format!(
            "the two domains are not conformally equivalent (prevertex mismatch {mismatch:e})"
        )));
    }
    let (s1, s2) = (fit.gdh.scale, fit.ginvdh.scale);
    Ok(WeierstrassData {
        genus: g,
        representation: Representation::HalfPlane {
            polygon: fit.gdh.polygon.clone(),
            lambda: Complex64::new((s1 / s2).sqrt(), 0.0) * Complex64::i().powu((g % 2) as u32),
            k: (s1 * s2).sqrt(),
        },
        associate: 0.0,
    })
}

/// Genus-one data at the solved staircase.
pub fn genus1_data() -> Result<WeierstrassData> {
    let sol = solve_genus1_coords()?;
    recover_data(&sol.coords, &sol.fit)
}

/// Same surface with every coordinate form multiplied by `e^{it}`.
pub fn associate_family(data: &WeierstrassData, t: f64) -> WeierstrassData {
    let mut d = data.clone();
    d.associate += t;
    d
}

/// A closed curve on the quotient surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodCycle {
    /// Handle cycle over the edge `P_{j-1} P_j` (`1 <= j <= 2g`).
    Handle(usize),
    /// Small loop around the end with this index in [`WeierstrassData::ends`].
    End(usize),
}

/// Residuals of one cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleResidual {
    /// The cycle.
    pub cycle: PeriodCycle,
    /// `Re` of the period of `e^{it} dh`.
    pub vertical: f64,
    /// For handle cycles: `|int Gdh - conj int G^-1 dh|` relative to `|int Gdh|`.
    pub conjugacy: Option<f64>,
    /// For end cycles: horizontal period vector `Re int (omega_1, omega_2)`.
    pub horizontal: Option<[f64; 2]>,
}

/// Period residuals over a list of cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    /// Per-cycle values.
    pub cycles: Vec<CycleResidual>,
    /// Largest vertical period.
    pub max_vertical: f64,
    /// Largest relative conjugacy residual over handle cycles.
    pub max_conjugacy: f64,
}

impl PeriodReport {
    /// Horizontal period vectors of the end cycles.
    pub fn end_periods(&self) -> Vec<[f64; 2]> {
        self.cycles.iter().filter_map(|c| c.horizontal).collect()
    }
}

/// All handle cycles and all end cycles of the data.
pub fn standard_cycles(data: &WeierstrassData) -> Vec<PeriodCycle> {
    let mut c: Vec<PeriodCycle> = (1..=2 * data.genus).map(PeriodCycle::Handle).collect();
    c.extend((0..data.ends().len()).map(PeriodCycle::End));
    c
}

/// Trapezoidal contour integral of `f` around a circle (exponentially
/// accurate for analytic integrands).
fn circle_integral<F: Fn(Complex64) -> [Complex64; 3]>(f: F, center: Complex64, radius: f64, n: usize) -> [Complex64; 3] {
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for m in 0..n {
        let e = Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64);
        let dz = Complex64::i() * e * radius * (2.0 * PI / n as f64);
        let v = f(center + e * radius);
        for c in 0..3 {
            acc[c] += v[c] * dz;
        }
    }
    acc
}

fn end_residual(data: &WeierstrassData, idx: usize) -> Result<CycleResidual> {
    let ends = data.ends();
    let end = *ends.get(idx).ok_or_else(|| Error::Domain(format!("no end with index {idx}")))?;
    let rot = Complex64::from_polar(1.0, data.associate);
    let periods = match data.representation {
        Representation::PuncturedSphere { .. } => {
            let others = ends.iter().map(|e| e.point).chain(std::iter::once(Complex64::new(0.0, 0.0)));
            let gap = others.filter(|p| (*p - end.point).norm() > 0.0).map(|p| (p - end.point).norm()).fold(f64::INFINITY, f64::min);
            circle_integral(|z| data.forms(z), end.point, 0.25 * gap, 256)
        }
        Representation::HalfPlane { .. } => {
            // G is regular at the ends; the loop integral is 2 pi i times the residue.
            let g = data.gauss_map(end.point);
            let two_pi_i_r = Complex64::new(0.0, 2.0 * PI * end.residue) * rot;
            coordinate_forms(g, two_pi_i_r)
        }
    };
    Ok(CycleResidual {
        cycle: PeriodCycle::End(idx),
        vertical: periods[2].re,
        conjugacy: None,
        horizontal: Some([periods[0].re, periods[1].re]),
    })
}

fn handle_residual(data: &WeierstrassData, j: usize) -> Result<CycleResidual> {
    let (polygon, lambda, k) = match &data.representation {
        Representation::HalfPlane { polygon, lambda, k } => (polygon, *lambda, *k),
        Representation::PuncturedSphere { .. } => {
            return Err(Error::NotSupported("handle cycles on the genus-zero surface".into()));
        }
    };
    if j == 0 || j > 2 * data.genus {
        return Err(Error::Domain(format!("handle cycle {j} outside 1..={}", 2 * data.genus)));
    }
    let pts = polygon.prevertices();
    let n = pts.len();
    let mut inv_ex = polygon.exponents().to_vec();
    for e in inv_ex.iter_mut().take(n - 1).skip(1) {
        *e = -*e;
    }
    let inv_inf = -4 - inv_ex.iter().sum::<i32>();
    let inv = ConformalPolygon::from_gaps(pts[0], polygon.gaps().to_vec(), &inv_ex, inv_inf, polygon.labels().to_vec());
    let f1 = cycle_period(polygon, Cycle::encircling(j))?;
    let f2 = cycle_period(&inv, Cycle::encircling(j))?;
    let rot = Complex64::from_polar(1.0, data.associate);
    let a = lambda * k * f1 * rot;
    let b = (k / lambda * f2 * rot).conj();
    // dh is single valued near the edge, so its loop integral is the sum of
    // the residues at +-1 that the circle encloses (none); measured anyway.
    let (lo, hi) = (pts[j], pts[j + 1]);
    let center = Complex64::new(0.5 * (lo + hi), 0.0);
    let reach = (1.0 - hi).min(lo + 1.0);
    let radius = 0.5 * (hi - lo) + 0.5 * reach;
    let dh = circle_integral(|z| [data.dh(z) * rot, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)], center, radius, 256);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    Ok(CycleResidual { cycle: PeriodCycle::Handle(j), vertical: dh[0].re, conjugacy: Some((a - b).norm() / scale), horizontal: None })
}

/// Vertical periods of all cycles, the conjugacy residual of handle cycles
/// and the horizontal period vectors of end cycles.
pub fn verify_periods(data: &WeierstrassData, cycles: &[PeriodCycle]) -> Result<PeriodReport> {
    let mut out = Vec::with_capacity(cycles.len());
    for c in cycles {
        out.push(match *c {
            PeriodCycle::Handle(j) => handle_residual(data, j)?,
            PeriodCycle::End(i) => end_residual(data, i)?,
        });
    }
    let max_vertical = out.iter().map(|c| c.vertical.abs()).fold(0.0, f64::max);
    let max_conjugacy = out.iter().filter_map(|c| c.conjugacy).fold(0.0, f64::max);
    Ok(PeriodReport { cycles: out, max_vertical, max_conjugacy })
}

/// Point of the half-plane for a point `zeta` of the strip chart
/// `zeta = log((t - 1) / (t + 1))`, returned as `t - p` for each marked `p`
/// without cancellation near `t = infinity`.
fn differences_from_strip(zeta: Complex64, marks: &[f64]) -> Vec<Complex64> {
    // With zeta_p = log((1 - p) / (1 + p)) + i pi the numerator
    // (1 - p) + (1 + p) e^zeta equals -(1 - p) expm1(zeta - zeta_p), which
    // stays accurate next to the prevertex.
    let den = -expm1_complex(zeta);
    marks
        .iter()
        .map(|p| {
            let zp = Complex64::new(((1.0 - p) / (1.0 + p)).ln(), PI);
            -(1.0 - p) * expm1_complex(zeta - zp) / den
        })
        .collect()
}

impl WeierstrassData {
    /// Gauss map at a point of the strip chart (half-plane data only).
    pub fn gauss_map_strip(&self, zeta: Complex64) -> Complex64 {
        match &self.representation {
            Representation::HalfPlane { polygon, lambda, .. } => {
                let pts = polygon.prevertices();
                let ex = polygon.exponents();
                let n = pts.len();
                let diffs = differences_from_strip(zeta, &pts[1..n - 1]);
                let (mut lm, mut ph) = (0.0, 0.0);
                for (d, a) in diffs.iter().zip(&ex[1..n - 1]) {
                    let e = 0.5 * *a as f64;
                    lm += e * d.norm().ln();
                    ph += e * branch_arg(*d);
                }
                lambda * Complex64::from_polar(lm.exp(), ph)
            }
            Representation::PuncturedSphere { .. } => {
                let t = (1.0 + zeta.exp()) / (-expm1_complex(zeta));
                self.gauss_map(t)
            }
        }
    }

    /// Coefficients of `e^{it} (omega_1, omega_2, omega_3)` with respect to
    /// `d zeta` in the strip chart, where `dh = (K / 2) d zeta`.
    pub fn forms_strip(&self, zeta: Complex64) -> [Complex64; 3] {
        let k = match &self.representation {
            Representation::HalfPlane { k, .. } => *k,
            Representation::PuncturedSphere { .. } => 0.5,
        };
        coordinate_forms(self.gauss_map_strip(zeta), Complex64::from_polar(0.5 * k, self.associate))
    }

    /// Real factor `K` of the height differential on the half-plane.
    pub fn height_factor(&self) -> Option<f64> {
        match &self.representation {
            Representation::HalfPlane { k, .. } => Some(*k),
            Representation::PuncturedSphere { .. } => None,
        }
    }

    /// Sum of the `G` exponents `sigma_j / 2` over the `P` prevertices; `G`
    /// behaves like `t^s` at `V`.
    pub fn exponent_at_v(&self) -> f64 {
        match &self.representation {
            Representation::HalfPlane { polygon, .. } => {
                let ex = polygon.exponents();
                ex[1..ex.len() - 1].iter().map(|a| 0.5 * *a as f64).sum()
            }
            Representation::PuncturedSphere { .. } => 0.5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residues_of_the_classical_surface() {
        for phi in [FRAC_PI_2, 1.0, 0.3] {
            let d = genus0_data(phi).unwrap();
            for e in d.ends() {
                assert!((e.residue.abs() - 1.0 / (4.0 * phi.sin())).abs() < 1e-14);
                // Numerical residue through a small circle.
                let r = circle_integral(|z| [d.dh(z); 3], e.point, 0.05, 256)[0] / Complex64::new(0.0, 2.0 * PI);
                assert!((r.re - e.residue).abs() < 1e-12 && r.im.abs() < 1e-12, "{r}");
            }
        }
    }

    #[test]
    fn square_lattice_end_periods() {
        let d = genus0_data(FRAC_PI_2).unwrap();
        let rep = verify_periods(&d, &standard_cycles(&d)).unwrap();
        assert!(rep.max_vertical < 1e-12);
        let p = rep.end_periods();
        let (a, b) = (p[0], p[1]);
        let dot = a[0] * b[0] + a[1] * b[1];
        let (la, lb) = ((a[0] * a[0] + a[1] * a[1]).sqrt(), (b[0] * b[0] + b[1] * b[1]).sqrt());
        assert!(dot.abs() < 1e-12 && (la - lb).abs() < 1e-12 && (la - FRAC_PI_2).abs() < 1e-12, "{a:?} {b:?}");
        // Residue form of the end period: x_1 + i x_2 = -2 pi i G(q) Res_q dh,
        // whose length is 2 pi |Res_q dh| because |G(q)| = 1.
        let e = d.ends()[0];
        let closed = Complex64::new(0.0, -2.0 * PI) * e.point * e.residue;
        assert!((closed.re - a[0]).abs() < 1e-12 && (closed.im - a[1]).abs() < 1e-12, "{closed} {a:?}");
    }

    #[test]
    fn half_plane_chart_is_a_rotation_of_the_closed_form() {
        let d = genus0_data(FRAC_PI_2).unwrap();
        let h = d.half_plane().unwrap();
        let rot = Complex64::from_polar(1.0, PI / 4.0);
        for t in [Complex64::new(0.3, 0.7), Complex64::new(-2.0, 0.1), Complex64::new(0.1, 3.0)] {
            // z^2 = i t, z in the sector between the punctures.
            let z = rot * t.sqrt();
            let dz_dt = rot * 0.5 / t.sqrt();
            assert!((h.dh(t) - d.dh(z) * dz_dt).norm() < 1e-13);
            assert!((h.gauss_map(t) * rot - d.gauss_map(z)).norm() < 1e-13);
        }
    }

    #[test]
    fn strip_chart_matches_half_plane() {
        let d = genus0_data(FRAC_PI_2).unwrap().half_plane().unwrap();
        for zeta in [Complex64::new(0.4, 1.0), Complex64::new(-3.0, 2.5), Complex64::new(1e-6, 1e-6)] {
            let t = (1.0 + zeta.exp()) / (1.0 - zeta.exp());
            assert!((d.gauss_map_strip(zeta) - d.gauss_map(t)).norm() < 1e-9 * d.gauss_map(t).norm());
            // dh = K dt / (t^2 - 1) = (K / 2) d zeta.
            let dt_dzeta = 2.0 * zeta.exp() / (1.0 - zeta.exp()).powi(2);
            assert!((d.dh(t) * dt_dzeta - 0.25).norm() < 1e-9);
        }
    }

    #[test]
    fn associate_family_composes() {
        let d = genus0_data(FRAC_PI_2).unwrap();
        let z = Complex64::new(0.2, 0.5);
        let twice = associate_family(&associate_family(&d, PI), PI);
        let f0 = d.forms(z);
        let f2 = twice.forms(z);
        for c in 0..3 {
            assert!((f0[c] - f2[c]).norm() < 1e-14);
        }
        let conj = associate_family(&d, FRAC_PI_2).forms(z);
        assert!((conj[2] - Complex64::i() * f0[2]).norm() < 1e-14);
    }

    #[test]
    fn stereographic_normal_is_unit_and_stable() {
        for g in [Complex64::new(0.0, 0.0), Complex64::new(3.0, -4.0), Complex64::new(1e200, 1e200), Complex64::new(0.6, 0.8)] {
            let n = stereographic_normal(g);
            assert!(((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) - 1.0).abs() < 1e-14);
        }
        assert_eq!(stereographic_normal(Complex64::new(0.6, 0.8))[2], 0.0);
    }
}
