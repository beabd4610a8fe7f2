//! Combinatorial model of a triangulated 3-manifold.
//!
//! A [`Complex`] is built from a vertex count and an ordered list of
//! tetrahedra. Edges and faces are derived, deduplicated and stored in
//! sorted order; the order of the tetrahedra is kept exactly as given so
//! that per-tetrahedron reductions are reproducible.
//!
//! Only face incidence and connectivity are checked by [`Complex::validate_closed`].
//! Vertex links are not inspected, so closed pseudo-manifolds pass as well.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::MeshError;

pub type Edge = [usize; 2];
pub type Face = [usize; 3];
pub type Tet = [usize; 4];

/// Immutable closed-or-open tetrahedral complex.
#[derive(Debug, Clone, PartialEq)]
pub struct Complex {
    vertex_count: usize,
    tetrahedra: Vec<Tet>,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    /// Number of tetrahedra containing `faces[f]`.
    face_incidence: Vec<usize>,
    /// Tetrahedron indices containing each vertex, in stored order.
    stars: Vec<Vec<usize>>,
}

/// Outcome of [`Complex::validate_closed`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub is_closed: bool,
    pub is_connected: bool,
    /// Faces whose incidence count differs from two, with that count.
    pub offending_faces: Vec<(Face, usize)>,
    pub counts: Counts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub tetrahedra: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct MeshDocument {
    vertices: usize,
    tetrahedra: Vec<Vec<i64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RadiiDocument {
    radii: Vec<f64>,
}

fn sorted<const N: usize>(mut a: [usize; N]) -> [usize; N] {
    a.sort_unstable();
    a
}

/// The four faces of a tetrahedron, each given by the vertex it omits.
pub fn tet_faces(t: &Tet) -> [Face; 4] {
    [
        sorted([t[1], t[2], t[3]]),
        sorted([t[0], t[2], t[3]]),
        sorted([t[0], t[1], t[3]]),
        sorted([t[0], t[1], t[2]]),
    ]
}

impl Complex {
    /// Builds the complex and its incidence structures.
    pub fn new(vertex_count: usize, tetrahedra: Vec<Tet>) -> Result<Self, MeshError> {
        if vertex_count == 0 || tetrahedra.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut stars = vec![Vec::new(); vertex_count];
        let mut edge_set = BTreeMap::new();
        let mut face_count: BTreeMap<Face, usize> = BTreeMap::new();

        for (ti, tet) in tetrahedra.iter().enumerate() {
            for (a, &v) in tet.iter().enumerate() {
                if v >= vertex_count {
                    return Err(MeshError::IndexOutOfRange {
                        tet: ti,
                        index: v,
                        vertex_count,
                    });
                }
                if tet[..a].contains(&v) {
                    return Err(MeshError::DuplicateVertex { tet: ti, index: v });
                }
            }
            for &v in tet {
                stars[v].push(ti);
            }
            for a in 0..4 {
                for b in a + 1..4 {
                    edge_set.insert(sorted([tet[a], tet[b]]), ());
                }
            }
            for face in tet_faces(tet) {
                *face_count.entry(face).or_default() += 1;
            }
        }
        if let Some(v) = stars.iter().position(Vec::is_empty) {
            return Err(MeshError::IsolatedVertex(v));
        }

        let (faces, face_incidence) = face_count.into_iter().unzip();
        Ok(Self {
            vertex_count,
            tetrahedra,
            edges: edge_set.into_keys().collect(),
            faces,
            face_incidence,
            stars,
        })
    }

    /// Parses the JSON mesh document `{"vertices": N, "tetrahedra": [[i,j,k,l], ...]}`.
    pub fn parse_mesh(text: &str) -> Result<Self, MeshError> {
        let doc: MeshDocument =
            serde_json::from_str(text).map_err(|e| MeshError::Malformed(e.to_string()))?;
        let mut tets = Vec::with_capacity(doc.tetrahedra.len());
        for (ti, raw) in doc.tetrahedra.iter().enumerate() {
            if raw.len() != 4 {
                return Err(MeshError::Malformed(format!(
                    "tetrahedron {ti} has {} entries, expected 4",
                    raw.len()
                )));
            }
            let mut tet = [0usize; 4];
            for (slot, &idx) in tet.iter_mut().zip(raw) {
                *slot = usize::try_from(idx).map_err(|_| {
                    MeshError::Malformed(format!("tetrahedron {ti}: negative vertex index {idx}"))
                })?;
            }
            tets.push(tet);
        }
        Self::new(doc.vertices, tets)
    }

    /// Serializes back to the mesh document format.
    pub fn to_json(&self) -> String {
        let doc = MeshDocument {
            vertices: self.vertex_count,
            tetrahedra: self
                .tetrahedra
                .iter()
                .map(|t| t.iter().map(|&v| v as i64).collect())
                .collect(),
        };
        serde_json::to_string(&doc).expect("mesh document is always serializable")
    }

    /// Boundary of the 4-simplex: the standard 5-vertex triangulation of S³.
    pub fn boundary_4_simplex() -> Self {
        let tets = (0..5)
            .map(|skip| {
                let mut t = [0; 4];
                for (k, v) in (0..5).filter(|&v| v != skip).enumerate() {
                    t[k] = v;
                }
                t
            })
            .collect();
        Self::new(5, tets).expect("boundary of the 4-simplex is well formed")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn tetrahedra(&self) -> &[Tet] {
        &self.tetrahedra
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn counts(&self) -> Counts {
        Counts {
            vertices: self.vertex_count,
            edges: self.edges.len(),
            faces: self.faces.len(),
            tetrahedra: self.tetrahedra.len(),
        }
    }

    /// Tetrahedra containing `v`, in stored order.
    pub fn vertex_star(&self, v: usize) -> Result<&[usize], MeshError> {
        self.stars
            .get(v)
            .map(Vec::as_slice)
            .ok_or(MeshError::VertexOutOfRange {
                index: v,
                vertex_count: self.vertex_count,
            })
    }

    /// Every face lies in exactly two tetrahedra.
    pub fn is_closed(&self) -> bool {
        self.face_incidence.iter().all(|&n| n == 2)
    }

    pub fn validate_closed(&self) -> ValidationReport {
        let offending_faces: Vec<_> = self
            .faces
            .iter()
            .zip(&self.face_incidence)
            .filter(|(_, &n)| n != 2)
            .map(|(f, &n)| (*f, n))
            .collect();
        ValidationReport {
            is_closed: offending_faces.is_empty(),
            is_connected: self.is_connected(),
            offending_faces,
            counts: self.counts(),
        }
    }

    /// Connectivity of the tetrahedron adjacency graph (shared faces).
    fn is_connected(&self) -> bool {
        let n = self.tetrahedra.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut first_owner: BTreeMap<Face, usize> = BTreeMap::new();
        for (ti, tet) in self.tetrahedra.iter().enumerate() {
            for face in tet_faces(tet) {
                match first_owner.get(&face) {
                    Some(&other) => {
                        let (a, b) = (find(&mut parent, ti), find(&mut parent, other));
                        parent[a] = b;
                    }
                    None => {
                        first_owner.insert(face, ti);
                    }
                }
            }
        }
        let root = find(&mut parent, 0);
        (1..n).all(|t| find(&mut parent, t) == root)
    }
}

/// Parses the radii document `{"radii": [r_0, ..., r_{N-1}]}`.
pub fn parse_radii(text: &str) -> Result<Vec<f64>, MeshError> {
    let doc: RadiiDocument =
        serde_json::from_str(text).map_err(|e| MeshError::Malformed(e.to_string()))?;
    for (index, &value) in doc.radii.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(MeshError::BadRadius { index, value });
        }
    }
    Ok(doc.radii)
}

pub fn radii_to_json(radii: &[f64]) -> String {
    serde_json::to_string(&RadiiDocument {
        radii: radii.to_vec(),
    })
    .expect("finite radii serialize")
}
