//! Geometry of a single conformal tetrahedron.
//!
//! Edge lengths are `r_a + r_b`. Face angles come from the law of cosines
//! (Euclidean or hyperbolic). At every vertex the three face angles are the
//! sides of a spherical triangle in the vertex link; its interior angles are
//! the dihedral angles at the three incident edges, and its area (spherical
//! excess) is the solid angle. The same pipeline runs for both background
//! geometries and, through [`Dual4`], produces exact derivatives with
//! respect to the radii.


use nalgebra::{Matrix4, Matrix5, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dual::{Dual4, Real};
use crate::error::GeomError;

/// Slack allowed beyond [-1, 1] before an inverse cosine argument is an error.
pub const COS_CLAMP_TOL: f64 = 1e-9;

/// Local vertex pairs in edge order: 01, 02, 03, 12, 13, 23.
pub const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Geometry::Euclidean => "euclidean",
            Geometry::Hyperbolic => "hyperbolic",
        })
    }
}

impl std::str::FromStr for Geometry {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "e" => Ok(Geometry::Euclidean),
            "hyperbolic" | "h" => Ok(Geometry::Hyperbolic),
            other => Err(format!("unknown geometry '{other}'")),
        }
    }
}

/// Four strictly positive, finite radii of one tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TetRadii([f64; 4]);

impl TetRadii {
    pub fn new(r: [f64; 4]) -> Result<Self, GeomError> {
        if r.iter().all(|x| x.is_finite() && *x > 0.0) {
            Ok(Self(r))
        } else {
            Err(GeomError::InvalidRadii(r.to_vec()))
        }
    }

    pub fn get(&self) -> [f64; 4] {
        self.0
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self, GeomError> {
        Self::new(self.0.map(|x| lambda * x))
    }
}

/// Index of the local edge `{a, b}` in [`EDGES`].
pub fn edge_index(a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("invalid local edge ({a}, {b})"),
    }
}

/// The two local vertices other than `a` and `b`.
fn complement(a: usize, b: usize) -> (usize, usize) {
    let mut rest = (0..4).filter(|&v| v != a && v != b);
    (rest.next().unwrap(), rest.next().unwrap())
}

/// Derived geometry of one admissible tetrahedron.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TetGeometry {
    pub lengths: [f64; 6],
    /// `face_angles[v][w]` is the angle at vertex `v` of the face omitting
    /// vertex `w` (`v != w`); the diagonal is zero.
    pub face_angles: [[f64; 4]; 4],
    /// Dihedral angle along each edge, in [`EDGES`] order.
    pub dihedral_angles: [f64; 6],
    pub solid_angles: [f64; 4],
    pub q_value: f64,
}

impl TetGeometry {
    pub fn dihedral(&self, a: usize, b: usize) -> f64 {
        self.dihedral_angles[edge_index(a, b)]
    }
}

pub fn edge_lengths(r: &TetRadii) -> [f64; 6] {
    let r = r.0;
    EDGES.map(|(a, b)| r[a] + r[b])
}

/// `(Σ 1/r)² − 2 Σ 1/r²`.
pub fn q_euclidean(r: &TetRadii) -> f64 {
    let k = r.0.map(|x| 1.0 / x);
    descartes_form(k)
}

/// The same quadratic grouped as `Σ_μ k_μ (Σ_{ν≠μ} k_ν − k_μ)`.
pub fn q_euclidean_grouped(r: &TetRadii) -> f64 {
    let k = r.0.map(|x| 1.0 / x);
    let total: f64 = k.iter().sum();
    k.iter().map(|&ki| ki * (total - ki - ki)).sum()
}

/// `(Σ coth r)² − 2 Σ coth² r + 4`.
pub fn q_hyperbolic(r: &TetRadii) -> f64 {
    let k = r.0.map(|x| 1.0 / x.tanh());
    descartes_form(k) + 4.0
}

pub fn q_value(r: &TetRadii, g: Geometry) -> f64 {
    match g {
        Geometry::Euclidean => q_euclidean(r),
        Geometry::Hyperbolic => q_hyperbolic(r),
    }
}

fn descartes_form(k: [f64; 4]) -> f64 {
    let s: f64 = k.iter().sum();
    let s2: f64 = k.iter().map(|x| x * x).sum();
    s * s - 2.0 * s2
}

/// `∂Q^E/∂r_μ = −(2/r_μ²)(Σ_{ν≠μ} 1/r_ν − 1/r_μ)`.
pub fn q_euclidean_gradient(r: &TetRadii) -> [f64; 4] {
    let k = r.0.map(|x| 1.0 / x);
    let total: f64 = k.iter().sum();
    std::array::from_fn(|m| -2.0 * k[m] * k[m] * (total - 2.0 * k[m]))
}

/// Hyperbolic nondegeneracy via the principal minors of the matrix with unit
/// diagonal and `cosh l_{ab}` off the diagonal.
///
/// This matrix is minus the Lorentzian Gram matrix of the vertices, so a
/// nondegenerate tetrahedron has negative minors of orders 2 and 4 and
/// positive minors of order 3 (each face a genuine triangle).
pub fn gram_minor_check(r: &TetRadii) -> bool {
    let l = edge_lengths(r);
    let mut m = Matrix4::<f64>::identity();
    for (e, &(a, b)) in EDGES.iter().enumerate() {
        m[(a, b)] = l[e].cosh();
        m[(b, a)] = l[e].cosh();
    }
    for mask in 0u8..16 {
        let idx: Vec<usize> = (0..4).filter(|&i| mask & (1 << i) != 0).collect();
        if idx.len() < 2 {
            continue;
        }
        let n = idx.len();
        let sub = nalgebra::DMatrix::from_fn(n, n, |i, j| m[(idx[i], idx[j])]);
        let det = sub.determinant();
        let ok = if n == 3 { det > 0.0 } else { det < 0.0 };
        if !ok {
            return false;
        }
    }
    true
}

/// Euclidean volume from the Cayley–Menger determinant.
pub fn cm_volume(r: &TetRadii) -> Result<f64, GeomError> {
    let l = edge_lengths(r);
    let mut cm = Matrix5::<f64>::from_element(1.0);
    cm[(0, 0)] = 0.0;
    for i in 1..5 {
        cm[(i, i)] = 0.0;
    }
    for (e, &(a, b)) in EDGES.iter().enumerate() {
        let sq = l[e] * l[e];
        cm[(a + 1, b + 1)] = sq;
        cm[(b + 1, a + 1)] = sq;
    }
    let det = cm.determinant();
    if det <= 0.0 {
        return Err(GeomError::DegenerateVolume(det));
    }
    Ok((det / 288.0).sqrt())
}

fn clamp_cos<T: Real>(x: T, context: &'static str) -> Result<T, GeomError> {
    let v = x.value();
    if !v.is_finite() || v.abs() > 1.0 + COS_CLAMP_TOL {
        return Err(GeomError::NumericDomain { context, value: v });
    }
    Ok(if v > 1.0 {
        x.with_value(1.0)
    } else if v < -1.0 {
        x.with_value(-1.0)
    } else {
        x
    })
}

/// Cosine of the angle between sides `a` and `b` opposite side `c`.
fn cos_angle<T: Real>(a: T, b: T, c: T, g: Geometry) -> T {
    match g {
        Geometry::Euclidean => (a * a + b * b - c * c) / (T::constant(2.0) * a * b),
        Geometry::Hyperbolic => {
            (a.cosh() * b.cosh() - c.cosh()) / (a.sinh() * b.sinh())
        }
    }
}

/// Angle between sides `a` and `b` of a triangle whose third side is `c`.
pub fn triangle_angle(a: f64, b: f64, c: f64, g: Geometry) -> Result<f64, GeomError> {
    Ok(clamp_cos(cos_angle(a, b, c, g), "face angle")?.acos())
}

/// All twelve face angles, indexed as in [`TetGeometry::face_angles`].
pub fn face_angles(l: &[f64; 6], g: Geometry) -> Result<[[f64; 4]; 4], GeomError> {
    let cos = face_cosines(l, g)?;
    let mut out = [[0.0; 4]; 4];
    for v in 0..4 {
        for w in 0..4 {
            if v != w {
                out[v][w] = cos[v][w].acos();
            }
        }
    }
    Ok(out)
}

fn face_cosines<T: Real>(l: &[T; 6], g: Geometry) -> Result<[[T; 4]; 4], GeomError> {
    let mut out = [[T::constant(1.0); 4]; 4];
    for v in 0..4 {
        for w in (0..4).filter(|&w| w != v) {
            let (a, b) = complement(v, w);
            let c = cos_angle(l[edge_index(v, a)], l[edge_index(v, b)], l[edge_index(a, b)], g);
            out[v][w] = clamp_cos(c, "face angle")?;
        }
    }
    Ok(out)
}

/// `sin²(γ/2)` for every face angle, indexed as [`TetGeometry::face_angles`].
///
/// For tangent spheres the half-angle law reduces to
/// `sin²(γ_v/2) = φ(r_x) φ(r_y) / (φ(r_v + r_x) φ(r_v + r_y))` with
/// `φ = id` (Euclidean) or `sinh` (hyperbolic), which is free of cancellation.
fn face_half_sines<T: Real>(r: [T; 4], g: Geometry) -> [[T; 4]; 4] {
    let phi = |x: T| match g {
        Geometry::Euclidean => x,
        Geometry::Hyperbolic => x.sinh(),
    };
    let mut out = [[T::constant(0.0); 4]; 4];
    for v in 0..4 {
        for w in (0..4).filter(|&w| w != v) {
            let (x, y) = complement(v, w);
            out[v][w] = phi(r[x]) * phi(r[y]) / (phi(r[v] + r[x]) * phi(r[v] + r[y]));
        }
    }
    out
}

struct LinkAngles<T> {
    /// `sin²(γ/2)` of the face angles.
    face_half: [[T; 4]; 4],
    dihedral: [T; 6],
    solid: [T; 4],
}

/// Dihedral and solid angles through the vertex-link spherical triangles.
///
/// The sides of the link at `v` are the face angles at `v`. The square root
/// of its Gram determinant `D_v = 1 − Σcos² + 2Πcos` is taken from the closed
/// form `√D_v = 2 Π φ(r) √Q / (φ(l_va) φ(l_vb) φ(l_vc))`, `φ = id` or `sinh`,
/// so that nearly flat links keep full relative accuracy. Angles then come
/// from `atan2` instead of `acos`.
fn link_angles<T: Real>(r: [T; 4], g: Geometry) -> Result<LinkAngles<T>, GeomError> {
    let l = EDGES.map(|(a, b)| r[a] + r[b]);
    let face_half = face_half_sines(r, g);
    let phi = |x: T| match g {
        Geometry::Euclidean => x,
        Geometry::Hyperbolic => x.sinh(),
    };
    let k = r.map(|x| match g {
        Geometry::Euclidean => T::constant(1.0) / x,
        Geometry::Hyperbolic => x.cosh() / x.sinh(),
    });
    let sum = k[0] + k[1] + k[2] + k[3];
    let sq = k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + k[3] * k[3];
    let mut q = sum * sum - T::constant(2.0) * sq;
    if g == Geometry::Hyperbolic {
        q = q + T::constant(4.0);
    }
    if !(q.value() > 0.0) {
        return Err(GeomError::Inadmissible { q: q.value() });
    }
    let numerator = T::constant(2.0) * phi(r[0]) * phi(r[1]) * phi(r[2]) * phi(r[3]) * q.sqrt();
    let sqrt_d: [T; 4] = std::array::from_fn(|v| {
        let mut den = T::constant(1.0);
        for w in (0..4).filter(|&w| w != v) {
            den = den * phi(l[edge_index(v, w)]);
        }
        numerator / den
    });

    let dihedral = EDGES.map(|(v, a)| {
        // Link of v: the side opposite the corner "edge va" is the face angle
        // at v in the face omitting a; the adjacent sides omit b and c.
        // With cos = 1 − 2s, cos a − cos b cos c = 2(s_b + s_c − s_a) − 4 s_b s_c.
        let (b, c) = complement(v, a);
        let (sa, sb, sc) = (face_half[v][a], face_half[v][b], face_half[v][c]);
        let x = T::constant(2.0) * (sb + sc - sa) - T::constant(4.0) * sb * sc;
        sqrt_d[v].atan2(x)
    });
    let solid = std::array::from_fn(|m| {
        // 1 + Σ cos = 4 − 2 Σ s.
        let mut x = T::constant(4.0);
        for w in (0..4).filter(|&w| w != m) {
            x = x - T::constant(2.0) * face_half[m][w];
        }
        // Spherical excess: tan(E/2) = √D / (1 + cos a + cos b + cos c).
        T::constant(2.0) * sqrt_d[m].atan2(x)
    });
    Ok(LinkAngles {
        face_half,
        dihedral,
        solid,
    })
}

fn require_admissible(r: &TetRadii, g: Geometry) -> Result<f64, GeomError> {
    let q = q_value(r, g);
    if q > 0.0 {
        Ok(q)
    } else {
        Err(GeomError::Inadmissible { q })
    }
}

pub fn solid_angles(r: &TetRadii, g: Geometry) -> Result<TetGeometry, GeomError> {
    let q_value = require_admissible(r, g)?;
    let link = link_angles(r.0, g)?;
    let mut face_angles = [[0.0; 4]; 4];
    for v in 0..4 {
        for w in 0..4 {
            if v != w {
                face_angles[v][w] = 2.0 * link.face_half[v][w].sqrt().asin();
            }
        }
    }
    Ok(TetGeometry {
        lengths: edge_lengths(r),
        face_angles,
        dihedral_angles: link.dihedral,
        solid_angles: link.solid,
        q_value,
    })
}

/// Heron's formula (Euclidean).
pub fn triangle_area(l: [f64; 3]) -> Result<f64, GeomError> {
    let mut s = l;
    s.sort_by(|a, b| b.total_cmp(a));
    let [a, b, c] = s;
    if !(c > 0.0 && a < b + c) {
        return Err(GeomError::TriangleInequality(l));
    }
    // Kahan's arrangement of Heron's formula for sorted sides a >= b >= c.
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    Ok(0.25 * p.max(0.0).sqrt())
}

/// `∂α_μ/∂r_ν` of a single tetrahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct TetJacobian {
    /// Symmetrized matrix `(J + Jᵀ)/2`.
    pub matrix: [[f64; 4]; 4],
    /// `J` as differentiated, before symmetrization.
    pub raw: [[f64; 4]; 4],
    /// `max |J − Jᵀ|` before symmetrization.
    pub symmetry_residual: f64,
}

impl TetJacobian {
    pub fn eigenvalues(&self) -> [f64; 4] {
        let m = Matrix4::from_fn(|i, j| self.matrix[i][j]);
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    pub fn apply(&self, x: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| (0..4).map(|j| self.matrix[i][j] * x[j]).sum())
    }
}

/// Relative symmetry residual above which a Jacobian is rejected.
const JACOBIAN_SYMMETRY_TOL: f64 = 1e-6;

/// Exact Jacobian of the solid angles, by forward-mode differentiation of the
/// link pipeline.
pub fn tet_jacobian(r: &TetRadii, g: Geometry) -> Result<TetJacobian, GeomError> {
    require_admissible(r, g)?;
    let seeded: [Dual4; 4] = std::array::from_fn(|k| Dual4::variable(r.0[k], k));
    let link = link_angles(seeded, g)?;
    let raw: [[f64; 4]; 4] = std::array::from_fn(|m| link.solid[m].d);

    let mut residual = 0.0f64;
    let mut scale = 0.0f64;
    let mut matrix = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            residual = residual.max((raw[i][j] - raw[j][i]).abs());
            scale = scale.max(raw[i][j].abs());
            matrix[i][j] = 0.5 * (raw[i][j] + raw[j][i]);
        }
    }
    if !residual.is_finite() || residual > JACOBIAN_SYMMETRY_TOL * scale.max(1.0) {
        return Err(GeomError::NumericDomain {
            context: "solid angle jacobian symmetry",
            value: residual,
        });
    }
    Ok(TetJacobian {
        matrix,
        raw,
        symmetry_residual: residual,
    })
}

/// `s = r` (Euclidean) or `s = tanh(r/2)` (hyperbolic), with `ds/dr`.
pub fn conformal_factor(r: f64, g: Geometry) -> (f64, f64) {
    match g {
        Geometry::Euclidean => (r, 1.0),
        Geometry::Hyperbolic => {
            let t = (0.5 * r).tanh();
            (t, 0.5 * (1.0 - t * t))
        }
    }
}
