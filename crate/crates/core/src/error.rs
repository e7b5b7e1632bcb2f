//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenient result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a special function or solver.
    #[error("domain error: {0}")]
    Domain(String),
    /// A conformal polygon violates its invariants.
    #[error("invalid polygon: {0}")]
    Validation(String),
    /// The exponent sum of a conformal polygon is wrong by `deficit`.
    #[error("exponent sum violated: a_inf must be {expected}, got {found} (deficit {deficit})")]
    ExponentSum {
        /// Required value of the exponent at infinity.
        expected: i32,
        /// Value found in the polygon.
        found: i32,
        /// `expected - found`.
        deficit: i32,
    },
    /// An integration path runs through a pole or non-integrable prevertex.
    #[error("integration path passes through singular prevertex {0}")]
    SingularPath(usize),
    /// An edge or contour integral diverges.
    #[error("divergent integral on edge {0}")]
    Divergence(usize),
    /// A geometric precondition (distances, nesting, adjacency) fails.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// A configuration lies on the boundary of the parameter space.
    #[error("boundary stratum reached: {0}")]
    BoundaryStratum(String),
    /// A degenerate quadrilateral or zero-length edge was supplied.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    /// The requested combination is outside the supported scope.
    #[error("not supported: {0}")]
    NotSupported(String),
    /// The prevertex fit did not converge; carries the final residuals.
    #[error("prevertex fit failed for {domain}: residuals {residuals:?}")]
    Fit {
        /// Domain label of the failed fit.
        domain: String,
        /// Residual vector at the best iterate.
        residuals: Vec<f64>,
    },
    /// The height solver exhausted its budget.
    #[error("solver did not converge: {message} (best height {best_height:e})")]
    Solver {
        /// Human readable reason.
        message: String,
        /// Best total height reached.
        best_height: f64,
    },
    /// Weierstrass data requested for a configuration that is not reflexive.
    #[error("contract violated: {0}")]
    Contract(String),
    /// Integrating the immersion around a mesh loop did not close.
    #[error("period closure failed: loop residual {0:e}")]
    PeriodClosure(f64),
    /// Reflected copies of a patch do not match along a seam.
    #[error("assembly failed: seam gap {0:e}")]
    Assembly(f64),
    /// Reading or writing a file failed.
    #[error("io error: {0}")]
    Io(String),
    /// A checkpoint or configuration could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
