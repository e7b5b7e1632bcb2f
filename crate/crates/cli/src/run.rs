//! The four commands. Each writes its artifacts into the output directory,
//! embeds the configuration hash in every one of them and prints a short
//! summary on standard output.

use crate::config::{file_digest, Command, RunConfig};
use crate::error::CliError;
use crate::json;
use orthoscherk::height_solver::{family_names, monodromy_test, report_from_fit, solve_genus, solve_genus1_coords, total_height};
use orthoscherk::mesh::{
    assemble, graph_check, integrate_patch_with, mean_curvature_residual, quotient_euler_characteristic, save_mesh,
    CONJUGATE_GRAPH_DIRECTION,
};
use orthoscherk::orthodisk::genus2_boundary_paths;
use orthoscherk::weierstrass::{associate_family, genus0_data, recover_data, standard_cycles, verify_periods};
use orthoscherk::{
    Checkpoint, FittedPair, GeometricCoords, GraphCheck, HeightReport, PatchOptions, PeriodReport, SolverOptions, SurfaceMesh,
    WeierstrassData,
};
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Largest accepted residual of the stored prevertices against the
/// staircase they claim to fit.
pub const CHECKPOINT_FIT_TOL: f64 = 1e-8;
/// Largest accepted relative monodromy defect.
pub const MONODROMY_TOL: f64 = 1e-6;

/// Run the selected command.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| output_error(&cfg.out, e))?;
    match cfg.command {
        Command::Solve => solve(cfg),
        Command::Generate => generate(cfg),
        Command::Verify => verify(cfg),
        Command::Sweep => sweep(cfg),
    }
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output { path: path.display().to_string(), message: e.to_string() }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| output_error(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = json::to_string(value).map_err(|e| output_error(path, e))?;
    write_text(path, &text)
}

/// A solved configuration of positive genus with its two fits.
struct Solved {
    coords: GeometricCoords,
    fit: FittedPair,
    report: HeightReport,
    polish_iterations: usize,
    trace: Vec<(f64, f64)>,
}

fn load_checkpoint(path: &Path, genus: Option<usize>) -> Result<Checkpoint, CliError> {
    let cp = Checkpoint::load(path).map_err(|e| CliError::Validation(format!("checkpoint {}: {e}", path.display())))?;
    if let Some(g) = genus {
        if cp.genus != g {
            return Err(CliError::Validation(format!("checkpoint {} has genus {}, expected {g}", path.display(), cp.genus)));
        }
    }
    Ok(cp)
}

fn solve_positive_genus(cfg: &RunConfig) -> Result<Solved, CliError> {
    let outcome = if cfg.genus == 1 {
        solve_genus1_coords()?
    } else {
        let seed = match &cfg.seed_checkpoint {
            Some(p) => {
                let cp = load_checkpoint(p, None)?;
                if cp.genus + 1 != cfg.genus && cp.genus != cfg.genus {
                    return Err(CliError::Validation(format!(
                        "seed checkpoint has genus {}, expected {} or {}",
                        cp.genus,
                        cfg.genus - 1,
                        cfg.genus
                    )));
                }
                Some(cp.coords()?)
            }
            None => None,
        };
        let opts = SolverOptions { height_tol: cfg.height_tol, ..SolverOptions::default() };
        solve_genus(cfg.genus, seed.as_ref(), &opts)?
    };
    if !(outcome.report.total <= cfg.height_tol) {
        return Err(CliError::Solver(format!("total height {:e} above tolerance {:e}", outcome.report.total, cfg.height_tol)));
    }
    Ok(Solved {
        coords: outcome.coords,
        fit: outcome.fit,
        report: outcome.report,
        polish_iterations: outcome.polish_iterations,
        trace: outcome.trace,
    })
}

fn checkpoint_of(cfg: &RunConfig, s: &Solved) -> Checkpoint {
    let mut cp = s.fit.checkpoint(&s.coords);
    if cfg.genus == 1 {
        cp.r_star = Some(-cp.prevertices_gdh[1]);
    }
    cp.config_hash = Some(cfg.hash());
    cp
}

fn default_checkpoint(cfg: &RunConfig) -> PathBuf {
    cfg.checkpoint.clone().unwrap_or_else(|| cfg.out_file("checkpoint.json"))
}

/// Height report written by `solve`.
#[derive(Debug, Serialize)]
struct SolveReport<'a> {
    config_hash: String,
    genus: usize,
    edges: &'a [f64],
    b: f64,
    r_star: Option<f64>,
    height: &'a HeightReport,
    fit_residual: f64,
    polish_iterations: usize,
    trace: &'a [(f64, f64)],
}

fn solve(cfg: &RunConfig) -> Result<(), CliError> {
    let s = solve_positive_genus(cfg)?;
    let cp = checkpoint_of(cfg, &s);
    let cp_path = default_checkpoint(cfg);
    cp.save(&cp_path).map_err(|e| output_error(&cp_path, e))?;
    let report = SolveReport {
        config_hash: cfg.hash(),
        genus: cfg.genus,
        edges: &s.coords.edges,
        b: s.coords.b,
        r_star: cp.r_star,
        height: &s.report,
        fit_residual: s.fit.max_residual(),
        polish_iterations: s.polish_iterations,
        trace: &s.trace,
    };
    let report_path = cfg.out_file("report.json");
    write_json(&report_path, &report)?;
    println!("genus {} solved: edges {:?}, b {}, total height {:e}", cfg.genus, s.coords.edges, s.coords.b, s.report.total);
    if let Some(r) = cp.r_star {
        println!("r_star {r}");
    }
    println!("checkpoint {}", cp_path.display());
    println!("report {}", report_path.display());
    Ok(())
}

/// Surface data together with the provenance of its parameters.
struct Surface {
    data: WeierstrassData,
    solved: Option<Solved>,
    checkpoint_sha256: Option<String>,
}

fn surface(cfg: &RunConfig, solve_if_missing: bool) -> Result<Surface, CliError> {
    if cfg.genus == 0 {
        let phi = cfg.lattice_angle().expect("validated");
        return Ok(Surface { data: genus0_data(phi)?, solved: None, checkpoint_sha256: None });
    }
    let solved = match &cfg.checkpoint {
        Some(p) if p.exists() || !solve_if_missing => {
            let cp = load_checkpoint(p, Some(cfg.genus))?;
            let (coords, fit) = FittedPair::from_checkpoint(&cp)?;
            let report = report_from_fit(&coords, &fit)?;
            let digest = file_digest(p)?;
            let solved = Solved { coords, fit, report, polish_iterations: 0, trace: vec![] };
            return Ok(Surface { data: recover_or_fail(&solved)?, solved: Some(solved), checkpoint_sha256: Some(digest) });
        }
        _ => solve_positive_genus(cfg)?,
    };
    let cp = checkpoint_of(cfg, &solved);
    let cp_path = default_checkpoint(cfg);
    cp.save(&cp_path).map_err(|e| output_error(&cp_path, e))?;
    let digest = file_digest(&cp_path)?;
    Ok(Surface { data: recover_or_fail(&solved)?, solved: Some(solved), checkpoint_sha256: Some(digest) })
}

fn recover_or_fail(s: &Solved) -> Result<WeierstrassData, CliError> {
    if s.fit.max_residual() > CHECKPOINT_FIT_TOL {
        return Err(CliError::Verification(format!(
            "stored prevertices do not fit the staircase (residual {:e} > {CHECKPOINT_FIT_TOL:e})",
            s.fit.max_residual()
        )));
    }
    Ok(recover_data(&s.coords, &s.fit)?)
}

/// One named pass/fail check.
#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check { name, value, tolerance, pass: value <= tolerance }
    }
}

/// Verification JSON written by `generate` and `verify`.
#[derive(Debug, Serialize)]
struct Verification {
    config_hash: String,
    checkpoint_sha256: Option<String>,
    genus: usize,
    edges: Vec<f64>,
    b: Option<f64>,
    phi: Option<f64>,
    fit_residual: Option<f64>,
    total_height: Option<f64>,
    monodromy_defect: Option<f64>,
    periods: PeriodReport,
    lattice: [[f64; 3]; 2],
    loop_residual: f64,
    mean_curvature_residual: f64,
    graph_check: GraphCheck,
    graph_check_note: &'static str,
    quotient_euler_characteristic: i64,
    expected_euler_characteristic: i64,
    checks: Vec<Check>,
    pass: bool,
}

fn verification(cfg: &RunConfig, s: &Surface) -> Result<(Verification, SurfaceMesh), CliError> {
    let mut checks = Vec::new();
    let (mut fit_residual, mut total_height, mut monodromy, mut edges, mut b) = (None, None, None, vec![], None);
    if let Some(sol) = &s.solved {
        let r = sol.fit.max_residual();
        checks.push(Check::at_most("checkpoint_fit", r, CHECKPOINT_FIT_TOL));
        checks.push(Check::at_most("total_height", sol.report.total, cfg.height_tol));
        let m = monodromy_test(cfg.genus, &sol.coords)?;
        checks.push(Check::at_most("monodromy", m, MONODROMY_TOL));
        (fit_residual, total_height, monodromy) = (Some(r), Some(sol.report.total), Some(m));
        (edges, b) = (sol.coords.edges.clone(), Some(sol.coords.b));
    }
    let periods = verify_periods(&s.data, &standard_cycles(&s.data))?;
    checks.push(Check::at_most("vertical_periods", periods.max_vertical, cfg.period_tol));
    checks.push(Check::at_most("conjugate_periods", periods.max_conjugacy, cfg.period_tol));
    let opts = PatchOptions { resolution: cfg.resolution, extent: cfg.extent, graded: true };
    let patch = integrate_patch_with(&s.data, &opts)?;
    checks.push(Check::at_most("mesh_loops", patch.loop_residual, cfg.period_tol));
    let curvature = mean_curvature_residual(&patch)?;
    let conjugate = integrate_patch_with(&associate_family(&s.data, FRAC_PI_2), &opts)?;
    let graph = graph_check(&conjugate, CONJUGATE_GRAPH_DIRECTION)?;
    checks.push(Check { name: "conjugate_graph", value: graph.min_separation, tolerance: 0.0, pass: graph.is_graph });
    let mut piece = assemble(&patch, [1, 1])?;
    let chi = quotient_euler_characteristic(&piece)?;
    let expected = -2 * (cfg.genus as i64 + 1);
    checks.push(Check { name: "euler_characteristic", value: chi as f64, tolerance: 0.0, pass: chi == expected });
    piece.tags.push(format!("config-hash {}", cfg.hash()));
    let pass = checks.iter().all(|c| c.pass);
    let v = Verification {
        config_hash: cfg.hash(),
        checkpoint_sha256: s.checkpoint_sha256.clone(),
        genus: cfg.genus,
        edges,
        b,
        phi: cfg.lattice_angle(),
        fit_residual,
        total_height,
        monodromy_defect: monodromy,
        periods,
        lattice: patch.lattice,
        loop_residual: patch.loop_residual,
        mean_curvature_residual: curvature,
        graph_check: graph,
        graph_check_note: "numerical evidence that the conjugate quarter is a graph, not a proof of embeddedness",
        quotient_euler_characteristic: chi,
        expected_euler_characteristic: expected,
        checks,
        pass,
    };
    Ok((v, piece))
}

fn report_checks(v: &Verification, path: &Path) -> Result<(), CliError> {
    for c in &v.checks {
        println!("{} {}: {:e} (tolerance {:e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    println!("verification {}", path.display());
    if v.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = v.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn generate(cfg: &RunConfig) -> Result<(), CliError> {
    let s = surface(cfg, true)?;
    let (v, piece) = verification(cfg, &s)?;
    for name in ["surface.obj", "surface.ply"] {
        let path = cfg.out_file(name);
        save_mesh(&piece, &path).map_err(|e| output_error(&path, e))?;
        println!("mesh {} ({} vertices, {} triangles)", path.display(), piece.vertices.len(), piece.triangles.len());
    }
    let path = cfg.out_file("verification.json");
    write_json(&path, &v)?;
    report_checks(&v, &path)
}

fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let s = surface(cfg, false)?;
    let (v, _) = verification(cfg, &s)?;
    let path = cfg.out_file("verification.json");
    write_json(&path, &v)?;
    report_checks(&v, &path)
}

fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let base = match &cfg.checkpoint {
        Some(p) => load_checkpoint(p, Some(2))?.coords()?,
        None => solve_positive_genus(cfg)?.coords,
    };
    let names = family_names(2);
    let mut csv = format!("# config-hash {}\nstratum,parameter,l1,b", cfg.hash());
    for n in &names {
        write!(csv, ",height_{n}").unwrap();
    }
    csv.push_str(",total,log_total,wall_seconds\n");
    let mut rows = 0;
    for path in genus2_boundary_paths(base.edges[0], base.b)? {
        for (t, c) in path.parameter.iter().zip(&path.points) {
            let start = Instant::now();
            let rep = total_height(c)?;
            let secs = start.elapsed().as_secs_f64();
            write!(csv, "{},{t:.16e},{:.16e},{:.16e}", path.stratum, c.edges[0], c.b).unwrap();
            for term in &rep.terms {
                write!(csv, ",{term:.16e}").unwrap();
            }
            writeln!(csv, ",{:.16e},{:.16e},{secs:.6}", rep.total, rep.log_total).unwrap();
            rows += 1;
        }
    }
    let out = cfg.out_file("sweep.csv");
    write_text(&out, &csv)?;
    println!("sweep {} ({rows} rows)", out.display());
    Ok(())
}
