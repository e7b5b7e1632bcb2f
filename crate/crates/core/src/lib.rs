//! Numerical construction of doubly periodic Scherk-type minimal surfaces
//! with handles through pairs of conjugate orthodisks.

pub mod error;
pub mod specfun;
pub mod quadrature;
pub mod scmap;
pub mod extlen;
pub mod genus1;
pub mod height_solver;
pub mod orthodisk;
pub mod weierstrass;
pub mod mesh;

pub use error::{Error, Result};
pub use genus1::Domain;
pub use height_solver::{FittedPair, HeightReport, SolveOutcome, SolverOptions};
pub use mesh::{GraphCheck, PatchOptions, SurfaceMesh};
pub use orthodisk::{BoundaryPath, Checkpoint, FittedPolygon, GeometricCoords};
pub use scmap::{ConformalPolygon, Cycle, VertexLabel};
pub use weierstrass::{PeriodReport, WeierstrassData};
