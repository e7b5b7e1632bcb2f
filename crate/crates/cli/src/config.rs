//! Run configuration: command-line flags merged over an optional flat
//! `key = value` file, validated, and hashed so every artifact can name the
//! configuration that produced it.

use crate::error::CliError;
use clap::{Parser, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

/// Sub-command selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Solve the period problem and write a checkpoint plus height report.
    Solve,
    /// Sample the surface and write OBJ/PLY meshes plus verification JSON.
    Generate,
    /// Re-run every verification on a checkpoint.
    Verify,
    /// Tabulate the height along paths to the boundary strata as CSV.
    Sweep,
}

impl Command {
    /// Lower-case name.
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Generate => "generate",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

/// Command-line arguments. Flags override values read from `--config`.
#[derive(Debug, Parser)]
#[command(name = "orthoscherk", version, about = "Construct and verify doubly periodic Scherk-type minimal surfaces of any genus")]
pub struct Cli {
    /// Action to perform.
    #[arg(value_enum)]
    pub command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of handles in the fundamental domain.
    #[arg(long)]
    pub genus: Option<usize>,
    /// Lattice angle of the genus-zero surface, in (0, pi/2].
    #[arg(long)]
    pub phi: Option<f64>,
    /// Base number of mesh cells across the strip.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Target total height of the solver.
    #[arg(long = "height-tol")]
    pub height_tol: Option<f64>,
    /// Largest accepted period residual.
    #[arg(long = "period-tol")]
    pub period_tol: Option<f64>,
    /// End truncation height in lattice lengths.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Checkpoint to write (`solve`) or read (`generate`, `verify`, `sweep`).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Checkpoint of genus `g - 1` or `g` used to seed `solve`.
    #[arg(long = "seed-checkpoint")]
    pub seed_checkpoint: Option<PathBuf>,
}

/// Effective, validated configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Action to perform.
    pub command: Command,
    /// Number of handles.
    pub genus: usize,
    /// Lattice angle (genus zero only).
    pub phi: Option<f64>,
    /// Base mesh resolution.
    pub resolution: usize,
    /// Solver height tolerance.
    pub height_tol: f64,
    /// Period residual tolerance.
    pub period_tol: f64,
    /// End truncation height.
    pub extent: f64,
    /// Output directory.
    pub out: PathBuf,
    /// Checkpoint path.
    pub checkpoint: Option<PathBuf>,
    /// Seed checkpoint path.
    pub seed_checkpoint: Option<PathBuf>,
}

/// Default base mesh resolution.
pub const DEFAULT_RESOLUTION: usize = 64;
/// Default solver height tolerance.
pub const DEFAULT_HEIGHT_TOL: f64 = 1e-8;
/// Default period residual tolerance.
pub const DEFAULT_PERIOD_TOL: f64 = 1e-6;
/// Distance from `pi/2` below which a lattice angle is the right angle.
pub const RIGHT_ANGLE_SNAP: f64 = 1e-6;
/// Default end truncation height.
pub const DEFAULT_EXTENT: f64 = 3.0;

const KEYS: [&str; 9] = ["genus", "phi", "resolution", "height-tol", "period-tol", "extent", "out", "checkpoint", "seed-checkpoint"];

/// Parse a flat `key = value` file. Blank lines and `#` comments are
/// skipped; underscores in keys are read as dashes.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected key = value", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Validation(format!("config line {}: unknown key `{}`", n + 1, k.trim())));
        }
        if map.insert(key, v.trim().to_string()).is_some() {
            return Err(CliError::Validation(format!("config line {}: duplicate key `{}`", n + 1, k.trim())));
        }
    }
    Ok(map)
}

fn parsed<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| CliError::Validation(format!("config key `{key}`: cannot parse `{v}`"))))
        .transpose()
}

impl RunConfig {
    /// Merge the flags over the configuration file (if any) and validate.
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Validation(format!("config {}: {e}", p.display())))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let path = |flag: &Option<PathBuf>, key: &str| flag.clone().or_else(|| file.get(key).map(PathBuf::from));
        let genus = match cli.genus {
            Some(g) => g,
            None => parsed(&file, "genus")?.ok_or_else(|| CliError::Validation("--genus is required".into()))?,
        };
        let cfg = RunConfig {
            command: cli.command,
            genus,
            phi: cli.phi.or(parsed(&file, "phi")?),
            resolution: cli.resolution.or(parsed(&file, "resolution")?).unwrap_or(DEFAULT_RESOLUTION),
            height_tol: cli.height_tol.or(parsed(&file, "height-tol")?).unwrap_or(DEFAULT_HEIGHT_TOL),
            period_tol: cli.period_tol.or(parsed(&file, "period-tol")?).unwrap_or(DEFAULT_PERIOD_TOL),
            extent: cli.extent.or(parsed(&file, "extent")?).unwrap_or(DEFAULT_EXTENT),
            out: path(&cli.out, "out").unwrap_or_else(|| PathBuf::from(".")),
            checkpoint: path(&cli.checkpoint, "checkpoint"),
            seed_checkpoint: path(&cli.seed_checkpoint, "seed-checkpoint"),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check ranges and the combinations each command needs.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        let positive = |name: &str, v: f64| -> Result<(), CliError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::Validation(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("height-tol", self.height_tol)?;
        positive("period-tol", self.period_tol)?;
        positive("extent", self.extent)?;
        if self.resolution < 2 {
            return bad(format!("resolution must be at least 2, got {}", self.resolution));
        }
        match (self.genus, self.phi) {
            (0, None) => return bad("genus 0 needs --phi".into()),
            (0, Some(p)) if !(p > 0.0 && p <= FRAC_PI_2 + RIGHT_ANGLE_SNAP) => {
                return bad(format!("phi must lie in (0, pi/2], got {p}"));
            }
            (g, Some(_)) if g > 0 => return bad("--phi only applies to genus 0".into()),
            _ => {}
        }
        match self.command {
            Command::Solve if self.genus == 0 => bad("genus 0 has no period problem to solve; use generate".into()),
            Command::Verify if self.genus > 0 && self.checkpoint.is_none() => bad("verify needs --checkpoint".into()),
            Command::Sweep if self.genus != 2 => bad(format!("sweep is implemented for genus 2, got {}", self.genus)),
            _ => Ok(()),
        }
    }

    /// The lattice angle, with values within [`RIGHT_ANGLE_SNAP`] of
    /// `pi/2` (such as a decimal `1.5707963`) taken as the right angle.
    pub fn lattice_angle(&self) -> Option<f64> {
        self.phi.map(|p| if (p - FRAC_PI_2).abs() <= RIGHT_ANGLE_SNAP { FRAC_PI_2 } else { p })
    }

    /// Canonical text of the fields that determine the numerical output.
    /// Paths are excluded so that relocating a run keeps its hash.
    pub fn canonical(&self) -> String {
        let phi = self.phi.map(|p| format!("{p:e}")).unwrap_or_else(|| "none".into());
        format!(
            "command={}\ngenus={}\nphi={phi}\nresolution={}\nheight-tol={:e}\nperiod-tol={:e}\nextent={:e}\n",
            self.command.name(),
            self.genus,
            self.resolution,
            self.height_tol,
            self.period_tol,
            self.extent
        )
    }

    /// Hex SHA-256 of [`RunConfig::canonical`].
    pub fn hash(&self) -> String {
        hex_digest(self.canonical().as_bytes())
    }

    /// Output file inside the output directory.
    pub fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Hex SHA-256 of a byte string.
pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hex SHA-256 of a file.
pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(hex_digest(&bytes))
}
