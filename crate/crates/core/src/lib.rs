//! Sphere packing metrics on closed triangulated 3-manifolds.
//!
//! A metric assigns a radius to every vertex; edge lengths are sums of
//! radii. The crate covers the geometry of single tetrahedra, the
//! decomposition of radius space into admissible and degenerate regions,
//! the combinatorial scalar curvature and its Jacobian, the extended convex
//! Ricci potential and a prescribed-curvature solver with numerical rigidity
//! checks.

pub mod complex;
pub mod curvature;
pub mod degeneracy;
pub mod dual;
pub mod error;
pub mod quadrature;
pub mod rigidity;
pub mod solver;
pub mod tetgeom;

pub use complex::{Complex, ValidationReport};
pub use curvature::{CurvatureJacobian, CurvatureVector, PackingMetric};
pub use degeneracy::{RegionLabel, SoddyCoefficients};
pub use error::{GeomError, MeshError, PackingError};
pub use solver::{PrescribedTarget, SolveOptions, SolveResult};
pub use tetgeom::{Geometry, TetGeometry, TetRadii};
