//! Height function on the space of staircase pairs, the reflexivity test,
//! the monodromy check, and the genus-by-genus solver.
//!
//! For every distinguished curve family the two domains give extremal
//! lengths `e1` (on `Gdh`) and `e2` (on `G^-1 dh`); the family contributes
//! `|exp(1/e1) - exp(1/e2)|^2 + |exp(e1) - exp(e2)|^2`. The families are
//! `gamma_i` (loops around `P_{i-1} P_i` and its mirror, `i < g`) and `delta`
//! (arcs joining the two half-strip ends across the zigzag). The height
//! vanishes exactly when the two domains are conformally equivalent with
//! matching vertices.
//!
//! The solver seeds genus `g` from a genus `g - 1` solution by inserting a
//! short central edge, follows the curve on which every term but
//! `gamma_{g-1}` vanishes while that edge grows, stops where the last term
//! changes sign, and polishes with Newton on all `g` conditions.

use crate::error::{Error, Result};
use crate::extlen::{ext_composite, ext_connecting, CurveFamily};
use crate::genus1::Domain;
use crate::orthodisk::{build_pair, fit_prevertices_from, fitted_from_half_gaps, Checkpoint, FittedPolygon, GeometricCoords};
use crate::scmap::{continue_period, cycle_period, ConformalPolygon, Cycle};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use crate::genus1::{solve_genus1, Genus1Solution};

/// Above this exponent the height terms are evaluated in log space.
const LOG_SPACE_THRESHOLD: f64 = 30.0;

fn log_abs_exp_diff(a: f64, b: f64) -> f64 {
    // ln |e^a - e^b| = max + ln(1 - e^{-|a - b|}).
    let m = a.max(b);
    let d = (a - b).abs();
    if d == 0.0 {
        return f64::NEG_INFINITY;
    }
    m + (-(-d).exp_m1()).ln()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Natural log of [`height_term`], finite even where the term overflows.
pub fn log_height_term(e1: f64, e2: f64) -> Result<f64> {
    if !(e1 > 0.0) || !(e2 > 0.0) {
        return Err(Error::Domain(format!("extremal lengths must be positive, got {e1} and {e2}")));
    }
    let t1 = 2.0 * log_abs_exp_diff(1.0 / e1, 1.0 / e2);
    let t2 = 2.0 * log_abs_exp_diff(e1, e2);
    Ok(log_add(t1, t2))
}

/// One height term `|exp(1/e1) - exp(1/e2)|^2 + |exp(e1) - exp(e2)|^2`.
///
/// Evaluated directly when all exponents are at most 30 and through
/// [`log_height_term`] otherwise; overflow gives `+inf`.
pub fn height_term(e1: f64, e2: f64) -> Result<f64> {
    if !(e1 > 0.0) || !(e2 > 0.0) {
        return Err(Error::Domain(format!("extremal lengths must be positive, got {e1} and {e2}")));
    }
    let big = [1.0 / e1, 1.0 / e2, e1, e2].iter().any(|x| *x > LOG_SPACE_THRESHOLD);
    if big {
        return Ok(log_height_term(e1, e2)?.exp());
    }
    let a = (1.0 / e1).exp() - (1.0 / e2).exp();
    let b = e1.exp() - e2.exp();
    Ok(a * a + b * b)
}

/// The `g` distinguished families: `gamma_1 .. gamma_{g-1}` then `delta`.
pub fn families(g: usize) -> Vec<CurveFamily> {
    let mut out: Vec<CurveFamily> = (1..g).map(CurveFamily::composite).collect();
    out.push(CurveFamily::connecting(0, 2 * g + 1));
    out
}

/// Names of the families in [`families`] order.
pub fn family_names(g: usize) -> Vec<String> {
    let mut out: Vec<String> = (1..g).map(|i| format!("gamma_{i}")).collect();
    out.push("delta".into());
    out
}

/// Extremal lengths of the `g` families on a fitted polygon.
pub fn extremal_lengths(poly: &ConformalPolygon, g: usize) -> Result<Vec<f64>> {
    families(g)
        .iter()
        .map(|f| if f.composite { ext_composite(poly, f) } else { ext_connecting(poly, f) })
        .collect()
}

/// Height of one configuration with its per-family data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightReport {
    /// Coordinates evaluated.
    pub coords: GeometricCoords,
    /// Family names.
    pub families: Vec<String>,
    /// Extremal lengths on the `Gdh` domain.
    pub ext_gdh: Vec<f64>,
    /// Extremal lengths on the `G^-1 dh` domain.
    pub ext_ginvdh: Vec<f64>,
    /// Height term per family.
    pub terms: Vec<f64>,
    /// Sum of the terms (`+inf` on overflow).
    pub total: f64,
    /// Natural log of the total, always finite for distinct lengths.
    pub log_total: f64,
    /// Central-difference gradient norm, when computed.
    pub gradient_norm: Option<f64>,
}

impl HeightReport {
    /// Log ratios `ln e1 - ln e2` per family.
    pub fn log_ratios(&self) -> Vec<f64> {
        self.ext_gdh.iter().zip(&self.ext_ginvdh).map(|(a, b)| a.ln() - b.ln()).collect()
    }

    /// Largest relative mismatch `|e1 - e2| / max(e1, e2)`.
    pub fn max_relative_mismatch(&self) -> f64 {
        self.ext_gdh
            .iter()
            .zip(&self.ext_ginvdh)
            .map(|(a, b)| (a - b).abs() / a.max(*b))
            .fold(0.0, f64::max)
    }
}

/// Fitted polygons of both domains, reused as seeds for nearby evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPair {
    /// `Gdh` fit.
    pub gdh: FittedPolygon,
    /// `G^-1 dh` fit.
    pub ginvdh: FittedPolygon,
}

impl FittedPair {
    /// Fit by domain.
    pub fn get(&self, d: Domain) -> &FittedPolygon {
        match d {
            Domain::Gdh => &self.gdh,
            Domain::GinvDh => &self.ginvdh,
        }
    }
}

impl FittedPair {
    /// Rebuild the pair stored in a checkpoint without refitting. The
    /// residuals of the parameter problem are evaluated at the stored
    /// prevertices, so a damaged checkpoint shows up in `max_residual`.
    pub fn from_checkpoint(cp: &Checkpoint) -> Result<(GeometricCoords, FittedPair)> {
        let coords = cp.coords()?;
        let half = |d: Domain| {
            cp.half_gaps(d)
                .ok_or_else(|| Error::Validation(format!("checkpoint needs {} prevertices per domain", 2 * cp.genus + 3)))
        };
        let gdh = fitted_from_half_gaps(&coords, Domain::Gdh, &half(Domain::Gdh)?)?;
        let ginvdh = fitted_from_half_gaps(&coords, Domain::GinvDh, &half(Domain::GinvDh)?)?;
        Ok((coords, FittedPair { gdh, ginvdh }))
    }

    /// Largest absolute residual of the parameter problem over both fits.
    pub fn max_residual(&self) -> f64 {
        self.gdh.residuals.iter().chain(&self.ginvdh.residuals).fold(0.0f64, |a, b| a.max(b.abs()))
    }

    /// Checkpoint document of this pair.
    pub fn checkpoint(&self, coords: &GeometricCoords) -> Checkpoint {
        Checkpoint::new(coords, &self.gdh, &self.ginvdh)
    }
}

/// Fit both domains, seeding from an earlier fit of the same genus.
pub fn fit_pair(coords: &GeometricCoords, seed: Option<&FittedPair>) -> Result<FittedPair> {
    let pair = build_pair(coords)?;
    let seed_for = |d: Domain| seed.filter(|s| s.gdh.genus == coords.genus).map(|s| s.get(d).half_gaps());
    let gdh_seed = seed_for(Domain::Gdh);
    let ginv_seed = seed_for(Domain::GinvDh);
    // The two fits are independent.
    let (gdh, ginvdh) = rayon::join(
        || fit_prevertices_from(&pair, Domain::Gdh, gdh_seed.as_deref()),
        || fit_prevertices_from(&pair, Domain::GinvDh, ginv_seed.as_deref()),
    );
    Ok(FittedPair { gdh: gdh?, ginvdh: ginvdh? })
}

/// Height report from an existing fit.
pub fn report_from_fit(coords: &GeometricCoords, fit: &FittedPair) -> Result<HeightReport> {
    let g = coords.genus;
    let e1 = extremal_lengths(&fit.gdh.polygon, g)?;
    let e2 = extremal_lengths(&fit.ginvdh.polygon, g)?;
    let terms = e1.iter().zip(&e2).map(|(a, b)| height_term(*a, *b)).collect::<Result<Vec<_>>>()?;
    let mut log_total = f64::NEG_INFINITY;
    for (a, b) in e1.iter().zip(&e2) {
        log_total = log_add(log_total, log_height_term(*a, *b)?);
    }
    Ok(HeightReport {
        coords: coords.clone(),
        families: family_names(g),
        ext_gdh: e1,
        ext_ginvdh: e2,
        total: terms.iter().sum(),
        terms,
        log_total,
        gradient_norm: None,
    })
}

/// Fit both domains and evaluate the height.
pub fn total_height(coords: &GeometricCoords) -> Result<HeightReport> {
    let fit = fit_pair(coords, None)?;
    report_from_fit(coords, &fit)
}

/// Height together with the fit, seeded from an earlier fit.
pub fn total_height_seeded(coords: &GeometricCoords, seed: Option<&FittedPair>) -> Result<(HeightReport, FittedPair)> {
    let fit = fit_pair(coords, seed)?;
    Ok((report_from_fit(coords, &fit)?, fit))
}

/// Central-difference gradient norm of the total height (relative step 1e-6).
pub fn gradient_norm(coords: &GeometricCoords, seed: Option<&FittedPair>) -> Result<f64> {
    let v = coords.to_vec();
    let mut s = 0.0;
    for k in 0..v.len() {
        let h = 1e-6 * v[k].abs().max(1e-3);
        let mut p = v.clone();
        let mut m = v.clone();
        p[k] += h;
        m[k] -= h;
        let hp = total_height_seeded(&GeometricCoords::from_vec(coords.genus, &p)?, seed)?.0.total;
        let hm = total_height_seeded(&GeometricCoords::from_vec(coords.genus, &m)?, seed)?.0.total;
        s += ((hp - hm) / (2.0 * h)).powi(2);
    }
    Ok(s.sqrt())
}

/// Whether all extremal-length pairs agree to relative tolerance `tol`.
pub fn reflexivity_check(coords: &GeometricCoords, tol: f64) -> Result<(bool, HeightReport)> {
    let r = total_height(coords)?;
    Ok((r.max_relative_mismatch() <= tol, r))
}

/// Worst relative defect of the identity `F(gamma) -> F(gamma) + 2 F(beta)`
/// over all adjacent pairs of staircase prevertices `t_j, t_{j+1}` of both
/// fitted polygons, where `beta` encircles `(t_j, t_{j+1})` and `gamma`
/// encircles the next edge `(t_{j+1}, t_{j+2})`. The loop carries `t_{j+1}`
/// once counter-clockwise around `t_j`. Also checks that `beta` is invariant.
pub fn monodromy_test(g: usize, coords: &GeometricCoords) -> Result<f64> {
    if coords.genus != g {
        return Err(Error::Validation(format!("coordinates have genus {}, expected {g}", coords.genus)));
    }
    let fit = fit_pair(coords, None)?;
    let mut worst: f64 = 0.0;
    for poly in [&fit.gdh.polygon, &fit.ginvdh.polygon] {
        worst = worst.max(monodromy_defect(poly, g, 1)?);
    }
    Ok(worst)
}

/// Monodromy defect of one polygon with labels `E_2, P_0..P_2g, E_1`,
/// after `turns` loops (the identity predicts `F + 2 turns F(beta)`).
pub fn monodromy_defect(poly: &ConformalPolygon, g: usize, turns: i32) -> Result<f64> {
    let mut worst: f64 = 0.0;
    // Staircase prevertices have indices 1..=2g+1; gamma needs t_{j+2} too.
    for j in 1..2 * g {
        let beta = cycle_period(poly, Cycle::encircling(j))?;
        let gamma = cycle_period(poly, Cycle::encircling(j + 1))?;
        let cg = continue_period(poly, j, Cycle::encircling(j + 1), turns)?;
        let cb = continue_period(poly, j, Cycle::encircling(j), turns)?;
        let expect = gamma + beta * (2.0 * turns as f64);
        worst = worst.max((cg - expect).norm() / beta.norm());
        worst = worst.max((cb - beta).norm() / beta.norm());
    }
    Ok(worst)
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Accept when the total height is at most this.
    pub height_tol: f64,
    /// Length of the inserted handle edge when regenerating.
    pub eta: f64,
    /// Growth factor of the handle edge per continuation step.
    pub growth: f64,
    /// Outer iteration budget.
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { height_tol: 1e-8, eta: 1e-2, growth: 1.3, max_iter: 500 }
    }
}

/// Outcome of a genus-`g` solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    /// Solved coordinates.
    pub coords: GeometricCoords,
    /// Height report at the solution.
    pub report: HeightReport,
    /// Fitted polygons at the solution.
    pub fit: FittedPair,
    /// Newton iterations of the final polish.
    pub polish_iterations: usize,
    /// Trace of `(handle length, last log ratio)` along the continuation.
    pub trace: Vec<(f64, f64)>,
}

/// Staircase coordinates of the genus-one solution, found by bisection of
/// the `delta` log ratio in `b`.
pub fn solve_genus1_coords() -> Result<SolveOutcome> {
    let f = |b: f64, seed: Option<&FittedPair>| -> Result<(f64, FittedPair)> {
        let c = GeometricCoords::new(1, vec![], b)?;
        let (r, fit) = total_height_seeded(&c, seed)?;
        Ok((r.log_ratios()[0], fit))
    };
    let (mut lo, mut hi) = (0.55, 3.0);
    let (flo, _) = f(lo, None)?;
    let (fhi, _) = f(hi, None)?;
    if flo.signum() == fhi.signum() {
        return Err(Error::Solver { message: "no sign change of the genus-one ratio".into(), best_height: f64::NAN });
    }
    let mut seed = None;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-15 * mid {
            break;
        }
        let (fm, fit) = f(mid, seed.as_ref())?;
        seed = Some(fit);
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let coords = GeometricCoords::new(1, vec![], 0.5 * (lo + hi))?;
    let (report, fit) = total_height_seeded(&coords, seed.as_ref())?;
    Ok(SolveOutcome { coords, report, fit, polish_iterations: 0, trace: vec![] })
}

/// Newton on the `m` selected log ratios with `m` free coordinates.
///
/// `assemble` maps the free vector to coordinates; `select` picks which
/// ratios are driven to zero.
fn constrained_newton<A, S>(
    free0: &[f64],
    assemble: &A,
    select: &S,
    seed: &mut Option<FittedPair>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, HeightReport, usize)>
where
    A: Fn(&[f64]) -> Result<GeometricCoords>,
    S: Fn(&[f64]) -> Vec<f64>,
{
    let m = free0.len();
    let mut x = free0.to_vec();
    let (mut rep, fit) = total_height_seeded(&assemble(&x)?, seed.as_ref())?;
    *seed = Some(fit);
    let mut r = select(&rep.log_ratios());
    let mut iters = 0;
    while iters < max_iter {
        let rn = r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if rn <= tol {
            break;
        }
        iters += 1;
        let mut jac = DMatrix::zeros(m, m);
        for k in 0..m {
            let h = 1e-7 * x[k].abs().max(1e-3);
            let mut xp = x.clone();
            xp[k] += h;
            let (rp, _) = total_height_seeded(&assemble(&xp)?, seed.as_ref())?;
            let sp = select(&rp.log_ratios());
            for i in 0..m {
                jac[(i, k)] = (sp[i] - r[i]) / h;
            }
        }
        let step = jac
            .lu()
            .solve(&(-DVector::from_vec(r.clone())))
            .ok_or_else(|| Error::Solver { message: "singular constraint Jacobian".into(), best_height: rep.total })?;
        let r0: f64 = r.iter().map(|v| v * v).sum();
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + lambda * s).collect();
            if let Ok(c) = assemble(&trial) {
                if let Ok((rt, ft)) = total_height_seeded(&c, seed.as_ref()) {
                    let st = select(&rt.log_ratios());
                    let r1: f64 = st.iter().map(|v| v * v).sum();
                    if r1 < r0 * (1.0 - 1e-4 * lambda) || r1.sqrt() <= tol {
                        x = trial;
                        rep = rt;
                        r = st;
                        *seed = Some(ft);
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let rn = r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if rn > tol {
        return Err(Error::Solver { message: format!("constraint Newton stalled at residual {rn:e}"), best_height: rep.total });
    }
    Ok((x, rep, iters))
}

/// Insert a central handle edge of length `eta` into a genus `g - 1`
/// solution and renormalize the total length.
pub fn regenerate(prev: &GeometricCoords, eta: f64) -> Result<GeometricCoords> {
    let g = prev.genus + 1;
    let s = 0.5 / (0.5 + eta);
    let l = prev.all_edges();
    let mut edges: Vec<f64> = l.iter().map(|v| v * s).collect();
    // The old central edge becomes l_{g-1}; the new central edge is eta * s.
    edges.truncate(g - 1);
    GeometricCoords::new(g, edges, prev.b * s)
}

/// Solve genus `g >= 2`. With a seed of genus `g` the seed is polished
/// directly; with a seed of genus `g - 1` (or none, in which case lower
/// genera are solved first) the handle is regenerated and grown.
pub fn solve_genus(g: usize, seed: Option<&GeometricCoords>, opts: &SolverOptions) -> Result<SolveOutcome> {
    if g < 2 {
        return Err(Error::Validation("solve_genus needs genus >= 2; use solve_genus1".into()));
    }
    if let Some(s) = seed.filter(|s| s.genus == g) {
        return polish(s, None, opts, vec![]);
    }
    let prev = match seed.filter(|s| s.genus == g - 1) {
        Some(s) => s.clone(),
        None if g == 2 => solve_genus1_coords()?.coords,
        None => solve_genus(g - 1, None, opts)?.coords,
    };
    let start = regenerate(&prev, opts.eta)?;
    // Free variables along the continuation: l_1..l_{g-2}, b; the handle t = l_g.
    let assemble = |free: &[f64], t: f64| -> Result<GeometricCoords> {
        let mut edges = free[..g - 2].to_vec();
        edges.push(0.5 - free[..g - 2].iter().sum::<f64>() - t);
        GeometricCoords::new(g, edges, free[g - 2])
    };
    let select = |r: &[f64]| -> Vec<f64> {
        let mut v = r[..g - 2].to_vec();
        v.push(r[g - 1]);
        v
    };
    let mut free: Vec<f64> = start.edges[..g - 2].to_vec();
    free.push(start.b);
    let mut t = start.all_edges()[g - 1];
    let mut fit_seed: Option<FittedPair> = None;
    let mut trace = Vec::new();
    let mut prev_state: Option<(f64, Vec<f64>, f64, FittedPair)> = None;
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > opts.max_iter {
            return Err(Error::Solver { message: "continuation budget exhausted".into(), best_height: f64::NAN });
        }
        let (x, rep, _) = constrained_newton(&free, &|f: &[f64]| assemble(f, t), &select, &mut fit_seed, 1e-12, 40)?;
        let last = rep.log_ratios()[g - 2];
        trace.push((t, last));
        if let Some((tp, xp, lp, fp)) = &prev_state {
            if lp.signum() != last.signum() {
                // Secant/bisection on the descent term between the two steps.
                let (mut ta, mut la, mut xa, mut fa) = (*tp, *lp, xp.clone(), fp.clone());
                let (mut tb, mut lb, mut xb) = (t, last, x.clone());
                let mut fb = fit_seed.clone().unwrap();
                for _ in 0..60 {
                    let tm = tb - lb * (tb - ta) / (lb - la);
                    let tm = if (tm - ta) * (tm - tb) < 0.0 { tm } else { 0.5 * (ta + tb) };
                    let w = (tm - ta) / (tb - ta);
                    let xm: Vec<f64> = xa.iter().zip(&xb).map(|(a, b)| a + w * (b - a)).collect();
                    let mut s = Some(fa.clone());
                    let (xm, rm, _) = constrained_newton(&xm, &|f: &[f64]| assemble(f, tm), &select, &mut s, 1e-12, 40)?;
                    let lm = rm.log_ratios()[g - 2];
                    trace.push((tm, lm));
                    if lm.abs() < 1e-9 || (tb - ta).abs() < 1e-14 {
                        let c = assemble(&xm, tm)?;
                        return polish(&c, s, opts, trace);
                    }
                    if lm.signum() == la.signum() {
                        ta = tm;
                        la = lm;
                        xa = xm;
                        fa = s.unwrap();
                    } else {
                        tb = tm;
                        lb = lm;
                        xb = xm;
                        fb = s.unwrap();
                    }
                }
                let _ = fb;
                let c = assemble(&xa, ta)?;
                return polish(&c, Some(fa), opts, trace);
            }
        }
        prev_state = Some((t, x.clone(), last, fit_seed.clone().unwrap()));
        free = x;
        let t_next = t * opts.growth;
        let l_last = 0.5 - free[..g - 2].iter().sum::<f64>() - t_next;
        if l_last <= 0.0 {
            return Err(Error::Solver {
                message: "handle edge exhausted the zigzag without a sign change".into(),
                best_height: rep.total,
            });
        }
        t = t_next;
    }
}

/// Newton on all `g` log ratios from a nearby configuration.
fn polish(c: &GeometricCoords, seed: Option<FittedPair>, opts: &SolverOptions, trace: Vec<(f64, f64)>) -> Result<SolveOutcome> {
    let g = c.genus;
    let mut s = seed;
    let assemble = |v: &[f64]| GeometricCoords::from_vec(g, v);
    let select = |r: &[f64]| r.to_vec();
    let (x, report, iters) = constrained_newton(&c.to_vec(), &assemble, &select, &mut s, 1e-13, opts.max_iter.min(50))?;
    let coords = assemble(&x)?;
    if !(report.total <= opts.height_tol) {
        return Err(Error::Solver { message: "final height above tolerance".into(), best_height: report.total });
    }
    Ok(SolveOutcome { coords, report, fit: s.unwrap(), polish_iterations: iters, trace })
}

/// Derivatives of the `delta` extremal lengths on both domains with respect
/// to moving length from the central edge `l_g` into `l_{g-1}` (central
/// difference, relative step 1e-6).
pub fn central_push_derivatives(coords: &GeometricCoords) -> Result<(f64, f64)> {
    let g = coords.genus;
    if g < 2 {
        return Err(Error::Validation("the central push needs genus >= 2".into()));
    }
    let h = 1e-6;
    let shifted = |s: f64| -> Result<HeightReport> {
        let mut e = coords.edges.clone();
        e[g - 2] += s;
        total_height(&GeometricCoords::new(g, e, coords.b)?)
    };
    let p = shifted(h)?;
    let m = shifted(-h)?;
    Ok(((p.ext_gdh[g - 1] - m.ext_gdh[g - 1]) / (2.0 * h), (p.ext_ginvdh[g - 1] - m.ext_ginvdh[g - 1]) / (2.0 * h)))
}
