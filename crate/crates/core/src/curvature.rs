//! Curvatures over a whole complex: `K_i = 4π − Σ α`, its extension `K̃`,
//! the α-curvature `K_i / s_i^α`, the total action `Σ K_i r_i`, and the
//! curvature Jacobian `Λ = ∂K/∂r` with its spectrum.
//!
//! Per-tetrahedron contributions are reduced in stored tetrahedron order.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::complex::{Complex, Tet};
use crate::degeneracy::{classify, extended_solid_angles, RegionLabel};
use crate::error::PackingError;
use crate::tetgeom::{conformal_factor, solid_angles, tet_jacobian, Geometry, TetRadii};

/// A radius per vertex together with the background geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingMetric {
    pub radii: Vec<f64>,
    pub geometry: Geometry,
}

impl PackingMetric {
    pub fn new(radii: Vec<f64>, geometry: Geometry) -> Result<Self, PackingError> {
        if let Some(bad) = radii.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(crate::error::GeomError::InvalidRadii(vec![*bad]).into());
        }
        Ok(Self { radii, geometry })
    }

    pub fn uniform(n: usize, r: f64, geometry: Geometry) -> Self {
        Self {
            radii: vec![r; n],
            geometry,
        }
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn tet_radii(&self, tet: &Tet) -> TetRadii {
        TetRadii::new(tet.map(|v| self.radii[v])).expect("metric radii are validated")
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            radii: self.radii.iter().map(|r| lambda * r).collect(),
            geometry: self.geometry,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureVector {
    pub values: Vec<f64>,
    pub alpha: f64,
    /// Computed from extended solid angles.
    pub extended: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureJacobian {
    /// Symmetrized `Λ`.
    pub matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
    /// `‖Λ r‖∞` (Euclidean only).
    pub kernel_residual: Option<f64>,
    /// `max |Λ − Λᵀ|` of the assembled matrix before symmetrization.
    pub symmetry_residual: f64,
}

impl CurvatureJacobian {
    /// `|cos|` of the angle between the eigenvector of the smallest
    /// eigenvalue and `r`.
    pub fn kernel_alignment(&self, r: &[f64]) -> f64 {
        let v = self.eigenvectors.column(0);
        let r = DVector::from_column_slice(r);
        (v.dot(&r) / (v.norm() * r.norm())).abs()
    }
}

pub(crate) fn check_pair(c: &Complex, m: &PackingMetric) -> Result<(), PackingError> {
    if m.len() != c.vertex_count() {
        return Err(PackingError::LengthMismatch {
            expected: c.vertex_count(),
            got: m.len(),
        });
    }
    if !c.is_closed() {
        return Err(PackingError::NotClosed(
            c.validate_closed().offending_faces.len(),
        ));
    }
    Ok(())
}

fn inadmissible(ti: usize, tet: &Tet, r: &TetRadii, g: Geometry) -> PackingError {
    match classify(r, g) {
        Ok(label) => PackingError::InadmissibleTet {
            tet: ti,
            vertices: *tet,
            label,
        },
        Err(e) => e.into(),
    }
}

/// Region label of every tetrahedron, in stored order.
pub fn tet_labels(c: &Complex, m: &PackingMetric) -> Result<Vec<RegionLabel>, PackingError> {
    if m.len() != c.vertex_count() {
        return Err(PackingError::LengthMismatch {
            expected: c.vertex_count(),
            got: m.len(),
        });
    }
    c.tetrahedra()
        .iter()
        .map(|t| Ok(classify(&m.tet_radii(t), m.geometry)?))
        .collect()
}

pub fn is_admissible(c: &Complex, m: &PackingMetric) -> Result<bool, PackingError> {
    Ok(tet_labels(c, m)?
        .iter()
        .all(|l| *l == RegionLabel::Admissible))
}

fn deficit(c: &Complex, per_tet: &[[f64; 4]]) -> Vec<f64> {
    let mut k = vec![4.0 * PI; c.vertex_count()];
    for (tet, angles) in c.tetrahedra().iter().zip(per_tet) {
        for (slot, &v) in tet.iter().enumerate() {
            k[v] -= angles[slot];
        }
    }
    k
}

pub fn scalar_curvature(c: &Complex, m: &PackingMetric) -> Result<CurvatureVector, PackingError> {
    check_pair(c, m)?;
    let per_tet = c
        .tetrahedra()
        .iter()
        .enumerate()
        .map(|(ti, tet)| {
            let r = m.tet_radii(tet);
            match solid_angles(&r, m.geometry) {
                Ok(geo) => Ok(geo.solid_angles),
                Err(crate::error::GeomError::Inadmissible { .. }) => {
                    Err(inadmissible(ti, tet, &r, m.geometry))
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Result<Vec<_>, PackingError>>()?;
    Ok(CurvatureVector {
        values: deficit(c, &per_tet),
        alpha: 0.0,
        extended: false,
    })
}

/// `K̃` from solid angles extended by constants; defined for every metric.
pub fn extended_curvature(
    c: &Complex,
    m: &PackingMetric,
) -> Result<CurvatureVector, PackingError> {
    check_pair(c, m)?;
    let per_tet = c
        .tetrahedra()
        .iter()
        .map(|tet| extended_solid_angles(&m.tet_radii(tet), m.geometry))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CurvatureVector {
        values: deficit(c, &per_tet),
        alpha: 0.0,
        extended: true,
    })
}

/// `R_{α,i} = K_i / s_i^α`.
pub fn alpha_curvature(
    c: &Complex,
    m: &PackingMetric,
    alpha: f64,
) -> Result<CurvatureVector, PackingError> {
    let k = scalar_curvature(c, m)?;
    let values = k
        .values
        .iter()
        .zip(&m.radii)
        .map(|(ki, &r)| ki / conformal_factor(r, m.geometry).0.powf(alpha))
        .collect();
    Ok(CurvatureVector {
        values,
        alpha,
        extended: false,
    })
}

/// `Σ K_i r_i`; Euclidean only, the hyperbolic action needs the volume of M.
pub fn total_action(c: &Complex, m: &PackingMetric) -> Result<f64, PackingError> {
    if m.geometry == Geometry::Hyperbolic {
        return Err(crate::error::GeomError::Unsupported(
            "hyperbolic total action requires the volume of the manifold",
        )
        .into());
    }
    let k = scalar_curvature(c, m)?;
    Ok(k.values.iter().zip(&m.radii).map(|(k, r)| k * r).sum())
}

/// `Λ = ∂K/∂r`, assembled from the negated per-tetrahedron Jacobians.
pub fn curvature_jacobian(
    c: &Complex,
    m: &PackingMetric,
) -> Result<CurvatureJacobian, PackingError> {
    check_pair(c, m)?;
    let n = c.vertex_count();
    let mut raw = DMatrix::<f64>::zeros(n, n);
    for (ti, tet) in c.tetrahedra().iter().enumerate() {
        let r = m.tet_radii(tet);
        let j = tet_jacobian(&r, m.geometry).map_err(|e| match e {
            crate::error::GeomError::Inadmissible { .. } => inadmissible(ti, tet, &r, m.geometry),
            other => other.into(),
        })?;
        for a in 0..4 {
            for b in 0..4 {
                raw[(tet[a], tet[b])] -= j.raw[a][b];
            }
        }
    }
    let symmetry_residual = (&raw - raw.transpose()).amax();
    let matrix = (&raw + raw.transpose()) * 0.5;
    let (eigenvalues, eigenvectors) = sorted_eigen(&matrix);
    let kernel_residual = (m.geometry == Geometry::Euclidean)
        .then(|| (&matrix * DVector::from_column_slice(&m.radii)).amax());
    Ok(CurvatureJacobian {
        matrix,
        eigenvalues,
        eigenvectors,
        kernel_residual,
        symmetry_residual,
    })
}

/// Eigen-decomposition of a symmetric matrix with ascending eigenvalues.
pub fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}
