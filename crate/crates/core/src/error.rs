use thiserror::Error;

use crate::degeneracy::RegionLabel;

/// Errors raised while ingesting meshes and radius documents.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("tetrahedron {tet}: vertex index {index} out of range (vertex count {vertex_count})")]
    IndexOutOfRange {
        tet: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("vertex {index} out of range (vertex count {vertex_count})")]
    VertexOutOfRange { index: usize, vertex_count: usize },
    #[error("tetrahedron {tet}: duplicate vertex {index}")]
    DuplicateVertex { tet: usize, index: usize },
    #[error("vertex {0} does not belong to any tetrahedron")]
    IsolatedVertex(usize),
    #[error("mesh must have at least one vertex and one tetrahedron")]
    Empty,
    #[error("radius {index} is not a strictly positive finite number: {value}")]
    BadRadius { index: usize, value: f64 },
}

/// Errors from the numerical geometry layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("radii must be strictly positive and finite, got {0:?}")]
    InvalidRadii(Vec<f64>),
    #[error("cosine argument {value} outside [-1, 1] beyond tolerance in {context}")]
    NumericDomain { context: &'static str, value: f64 },
    #[error("tetrahedron is not admissible (Q = {q})")]
    Inadmissible { q: f64 },
    #[error("triangle inequality violated for lengths {0:?}")]
    TriangleInequality([f64; 3]),
    #[error("Cayley-Menger determinant {0} is not positive")]
    DegenerateVolume(f64),
    #[error("no finite tangent sphere: tanh root {0} outside (0, 1)")]
    NoFiniteRoot(f64),
    #[error("region classification inconsistent: Q = {q}, {matches} degenerate sets matched")]
    InvariantViolation { q: f64, matches: usize },
    #[error("operation not supported: {0}")]
    Unsupported(&'static str),
}

/// Errors from operations over a whole complex.
#[derive(Debug, Error)]
pub enum PackingError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("complex is not closed; {0} faces do not have exactly two incident tetrahedra")]
    NotClosed(usize),
    #[error("radius vector has length {got}, complex has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("tetrahedron {tet} {vertices:?} is inadmissible: {label:?}")]
    InadmissibleTet {
        tet: usize,
        vertices: [usize; 4],
        label: RegionLabel,
    },
    #[error("vertex {index} out of range (vertex count {vertex_count})")]
    VertexOutOfRange { index: usize, vertex_count: usize },
    #[error("numeric failure: {0}")]
    Numeric(String),
}
