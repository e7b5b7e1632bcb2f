//! Genus-one period problem: closed-form strip lengths, the two conformal
//! polygons they come from, the root `r*` where the lengths agree, and the
//! asymptotics of the two polygons near the degenerate endpoint.
//!
//! The two polygons live on the upper half-plane with prevertices
//! `-1 < -r < 0 < r < 1`. The `Gdh` integrand is
//! `sqrt(t) / (sqrt(t^2 - 1) (t^2 - r^2))` and the `G^-1 dh` integrand is
//! `sqrt(t^2 - 1) / (sqrt(t) (t^2 - r^2))`. Both are scaled so that their
//! residues at `t = r` equal `1 / (2r)`. The lengths of the edge `(1, inf)`
//! are `A_Gdh(r)` and `A_ginv(r)`.

use crate::error::{Error, Result};
use crate::extlen::{ext_connecting, CurveFamily};
use crate::scmap::{ConformalPolygon, VertexLabel};
use crate::specfun::{gamma, hyp2f1, HypergeometricParams};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which member of the conjugate pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    /// The `Gdh` orthodisk.
    Gdh,
    /// The `G^-1 dh` orthodisk.
    GinvDh,
}

impl Domain {
    /// The other member of the pair.
    pub fn other(self) -> Self {
        match self {
            Domain::Gdh => Domain::GinvDh,
            Domain::GinvDh => Domain::Gdh,
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Domain::Gdh => write!(f, "Gdh"),
            Domain::GinvDh => write!(f, "G^-1 dh"),
        }
    }
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("r = {r} outside (0, 1)")))
    }
}

/// `A_Gdh(r) = 2 sqrt(pi) sqrt(1 - r^2) / sqrt(r) * Gamma(3/4) / Gamma(1/4) * F(3/4, 1; 5/4; r^2)`.
///
/// Tends to infinity as `r -> 0` and to `pi/2` as `r -> 1`.
pub fn a_gdh(r: f64) -> Result<f64> {
    check_r(r)?;
    let f = hyp2f1(HypergeometricParams::new(0.75, 1.0, 1.25, r * r))?;
    let one_minus = (1.0 - r) * (1.0 + r);
    Ok(2.0 * PI.sqrt() * one_minus.sqrt() / r.sqrt() * gamma(0.75)? / gamma(0.25)? * f)
}

/// `A_ginv(r) = sqrt(pi) sqrt(r) / sqrt(1 - r^2) * Gamma(5/4) / Gamma(7/4) * F(1/4, 1; 7/4; r^2)`.
///
/// Tends to zero as `r -> 0` and to infinity as `r -> 1`.
pub fn a_ginvdh(r: f64) -> Result<f64> {
    check_r(r)?;
    let f = hyp2f1(HypergeometricParams::new(0.25, 1.0, 1.75, r * r))?;
    let one_minus = (1.0 - r) * (1.0 + r);
    Ok(PI.sqrt() * r.sqrt() / one_minus.sqrt() * gamma(1.25)? / gamma(1.75)? * f)
}

/// Labels of the five genus-one prevertices `-1, -r, 0, r, 1`.
fn labels() -> Vec<VertexLabel> {
    vec![VertexLabel::P(0), VertexLabel::E(2), VertexLabel::P(1), VertexLabel::E(1), VertexLabel::P(2)]
}

/// Genus-one polygon of the given domain, unscaled.
pub fn polygon(domain: Domain, r: f64) -> Result<ConformalPolygon> {
    check_r(r)?;
    let ex = match domain {
        Domain::Gdh => [-1, -2, 1, -2, -1],
        Domain::GinvDh => [1, -2, -1, -2, 1],
    };
    let p = ConformalPolygon::with_forced_infinity(&[-1.0, -r, 0.0, r, 1.0], &ex, labels());
    p.validate()?;
    Ok(p)
}

/// Factor that normalizes the residue at `r` to `1 / (2r)`.
pub fn residue_scale(domain: Domain, r: f64) -> f64 {
    let q = ((1.0 - r) * (1.0 + r)).sqrt() / r.sqrt();
    match domain {
        Domain::Gdh => q,
        Domain::GinvDh => 1.0 / q,
    }
}

/// Strip length `A(r)` of the domain by direct quadrature of the integrand
/// over the edge `(1, inf)`.
pub fn a_by_quadrature(domain: Domain, r: f64) -> Result<f64> {
    let p = polygon(domain, r)?;
    Ok(residue_scale(domain, r) * p.edge_period(p.len() - 1)?.norm())
}

/// Result of the genus-one solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Genus1Solution {
    /// Root of `A_Gdh(r) = A_ginv(r)`.
    pub r_star: f64,
    /// `A_Gdh(r*) - A_ginv(r*)` from the closed forms.
    pub residual: f64,
    /// Common strip length at the root.
    pub length: f64,
    /// Bisection steps taken.
    pub iterations: usize,
}

/// Bisection root of `A_Gdh(r) - A_ginv(r)` on `(0, 1)`.
///
/// The difference is positive near 0 and negative near 1, so a sign change is
/// guaranteed; bisection runs until the bracket cannot be split further.
pub fn solve_genus1() -> Result<Genus1Solution> {
    let h = |r: f64| -> Result<f64> { Ok(a_gdh(r)? - a_ginvdh(r)?) };
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-6);
    let (mut f_lo, f_hi) = (h(lo)?, h(hi)?);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Solver { message: "no sign change for the genus-one lengths".into(), best_height: f64::NAN });
    }
    let mut iterations = 0;
    while iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = h(mid)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    // Keep the bracket end with the smaller residual.
    let (r_lo, r_hi) = (h(lo)?, h(hi)?);
    let r_star = if r_lo.abs() <= r_hi.abs() { lo } else { hi };
    Ok(Genus1Solution { r_star, residual: h(r_star)?, length: a_gdh(r_star)?, iterations })
}

/// Model polygon near the degenerate genus-one endpoint: a pole at 0 and a
/// cluster `1 - h, 1, 1 + h` whose middle edge `(1, 1 + h)` develops to a
/// segment of length `eps`.
///
/// The `Gdh` side has exponents `(-2, -1, +1, -1)` and the `G^-1 dh` side
/// `(-2, +1, -1, +1)`. The developed length of the short edge scales like
/// `h^(1/2)` and `h^(3/2)` respectively.
pub fn degeneration_polygon(domain: Domain, h: f64) -> Result<ConformalPolygon> {
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::Domain(format!("cluster half-width {h} outside (0, 1/2)")));
    }
    let ex = match domain {
        Domain::Gdh => [-2, -1, 1, -1],
        Domain::GinvDh => [-2, 1, -1, 1],
    };
    let p = ConformalPolygon::from_gaps(0.0, vec![1.0 - h, h, h], &ex, -4 - ex.iter().sum::<i32>(), vec![]);
    p.validate()?;
    Ok(p)
}

/// Developed length of the short edge of the degeneration model.
pub fn degeneration_epsilon(domain: Domain, h: f64) -> Result<f64> {
    Ok(degeneration_polygon(domain, h)?.edge_period(2)?.norm())
}

/// Cluster half-width `h` for which the short edge has length `eps`,
/// by bisection in `log h`.
pub fn degeneration_gap(domain: Domain, eps: f64) -> Result<f64> {
    let f = |lh: f64| -> Result<f64> { Ok(degeneration_epsilon(domain, lh.exp())?.ln() - eps.ln()) };
    let (mut lo, mut hi) = ((1e-14f64).ln(), (0.45f64).ln());
    if f(lo)? > 0.0 || f(hi)? < 0.0 {
        return Err(Error::Domain(format!("edge length {eps} outside the model range")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-14 {
            break;
        }
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Extremal length of the arcs joining `(0, 1 - h)` and `(1 + h, inf)` in the
/// degeneration model: the family crossing the collapsing cluster.
pub fn degeneration_ext(domain: Domain, h: f64) -> Result<f64> {
    let p = degeneration_polygon(domain, h)?;
    ext_connecting(&p, &CurveFamily::connecting(0, p.len() - 1))
}

/// One sample of the degeneration study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerationSample {
    /// Developed length of the collapsing edge.
    pub eps: f64,
    /// Cluster half-width on the `Gdh` side.
    pub gap_gdh: f64,
    /// Cluster half-width on the `G^-1 dh` side.
    pub gap_ginvdh: f64,
    /// Extremal length of the crossing family on the `Gdh` side.
    pub ext_gdh: f64,
    /// Extremal length of the crossing family on the `G^-1 dh` side.
    pub ext_ginvdh: f64,
}

/// Degeneration study over a list of edge lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerationStudy {
    /// Per-`eps` samples.
    pub samples: Vec<DegenerationSample>,
    /// Least-squares slope of `log gap_gdh` against `log eps`.
    pub exponent_gdh: f64,
    /// Least-squares slope of `log gap_ginvdh` against `log eps`.
    pub exponent_ginvdh: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Run the degeneration study at the given edge lengths.
pub fn degeneration_study(eps: &[f64]) -> Result<DegenerationStudy> {
    let mut samples = Vec::with_capacity(eps.len());
    for &e in eps {
        let gap_gdh = degeneration_gap(Domain::Gdh, e)?;
        let gap_ginvdh = degeneration_gap(Domain::GinvDh, e)?;
        samples.push(DegenerationSample {
            eps: e,
            gap_gdh,
            gap_ginvdh,
            ext_gdh: degeneration_ext(Domain::Gdh, gap_gdh)?,
            ext_ginvdh: degeneration_ext(Domain::GinvDh, gap_ginvdh)?,
        });
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.eps).collect();
    let g1: Vec<f64> = samples.iter().map(|s| s.gap_gdh).collect();
    let g2: Vec<f64> = samples.iter().map(|s| s.gap_ginvdh).collect();
    Ok(DegenerationStudy { exponent_gdh: loglog_slope(&xs, &g1), exponent_ginvdh: loglog_slope(&xs, &g2), samples })
}
