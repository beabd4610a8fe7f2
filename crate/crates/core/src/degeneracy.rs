//! Structure of the admissible space of one tetrahedron.
//!
//! Outside the admissible set `{Q > 0}` the positive orthant splits into four
//! disjoint degenerate sets `V_μ = {r_μ ≤ f(other three radii)}`, where `f`
//! is the critical radius at which the sphere at `μ` is tangent to the other
//! three with its centre in their plane. `f` solves the Descartes quadratic
//! `A r² + B r + C = 0` (Euclidean) or the analogous quadratic in `tanh r`
//! (hyperbolic). On `V_μ` the solid angles are extended by constants: `2π`
//! at `μ`, zero elsewhere.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::GeomError;
use crate::tetgeom::{q_value, solid_angles, Geometry, TetRadii};

/// Region of a radius 4-tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "label", content = "vertex", rename_all = "lowercase")]
pub enum RegionLabel {
    Admissible,
    /// Lies in `V_μ` for the given local vertex.
    Degenerate(usize),
}

/// Which formula of the piecewise boundary function applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Positive,
    Zero,
    Negative,
}

/// Coefficients of the boundary quadratic in `r_i` (Euclidean) or
/// `tanh r_i` (hyperbolic) for fixed `(r_j, r_k, r_l)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoddyCoefficients {
    pub geometry: Geometry,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub discriminant: f64,
    /// Threshold below which `|A|` is treated as zero.
    pub eps_a: f64,
}

fn check_triple(r: [f64; 3]) -> Result<(), GeomError> {
    if r.iter().all(|x| x.is_finite() && *x > 0.0) {
        Ok(())
    } else {
        Err(GeomError::InvalidRadii(r.to_vec()))
    }
}

impl SoddyCoefficients {
    fn from_variables(geometry: Geometry, x: [f64; 3], extra: f64) -> Self {
        let [j, k, l] = x;
        let p = j * k * l;
        let sigma = j * k + j * l + k * l;
        let sq = j * j * k * k + j * j * l * l + k * k * l * l;
        // Euclidean A = 2jkl(j+k+l) − Σ(jk)² equals σ² − 2Σ(jk)²; the
        // hyperbolic 𝒜 adds 4(jkl)².
        let a = extra * p * p + sigma * sigma - 2.0 * sq;
        let b = 2.0 * p * sigma;
        let c = -p * p;
        let scale = j.max(k).max(l);
        Self {
            geometry,
            a,
            b,
            c,
            discriminant: b * b - 4.0 * a * c,
            eps_a: 1e-12 * scale.powi(4),
        }
    }

    pub fn euclidean(rj: f64, rk: f64, rl: f64) -> Result<Self, GeomError> {
        check_triple([rj, rk, rl])?;
        Ok(Self::from_variables(Geometry::Euclidean, [rj, rk, rl], 0.0))
    }

    /// Coefficients in the variable `tanh r_i`.
    pub fn hyperbolic(rj: f64, rk: f64, rl: f64) -> Result<Self, GeomError> {
        check_triple([rj, rk, rl])?;
        let t = [rj.tanh(), rk.tanh(), rl.tanh()];
        Ok(Self::from_variables(Geometry::Hyperbolic, t, 4.0))
    }

    pub fn branch(&self) -> Branch {
        if self.a.abs() <= self.eps_a {
            Branch::Zero
        } else if self.a > 0.0 {
            Branch::Positive
        } else {
            Branch::Negative
        }
    }

    /// The selected root: `(−B + √Δ)/(2A)` for `A ≠ 0` and `−C/B` for `A = 0`.
    ///
    /// Both cases are evaluated through the conjugate form `−2C/(B + √Δ)`,
    /// which equals either expression and does not cancel when `A` is small.
    pub fn root(&self) -> f64 {
        match self.branch() {
            Branch::Zero => -self.c / self.b,
            _ => -2.0 * self.c / (self.b + self.discriminant.sqrt()),
        }
    }

    /// The textbook `(−B + √Δ)/(2A)`, without the conjugate rewriting.
    pub fn root_direct(&self) -> f64 {
        (-self.b + self.discriminant.sqrt()) / (2.0 * self.a)
    }

    /// The root discarded by the boundary function, `(−B − √Δ)/(2A)`; only
    /// finite when `A ≠ 0`.
    pub fn rejected_root(&self) -> f64 {
        (-self.b - self.discriminant.sqrt()) / (2.0 * self.a)
    }
}

/// Critical Euclidean radius `f(r_j, r_k, r_l)`.
pub fn soddy_radius_euclidean(rj: f64, rk: f64, rl: f64) -> Result<f64, GeomError> {
    Ok(SoddyCoefficients::euclidean(rj, rk, rl)?.root())
}

/// Critical hyperbolic radius `g(r_j, r_k, r_l) = artanh t`.
pub fn soddy_radius_hyperbolic(rj: f64, rk: f64, rl: f64) -> Result<f64, GeomError> {
    let t = SoddyCoefficients::hyperbolic(rj, rk, rl)?.root();
    if !(t > 0.0 && t < 1.0) {
        return Err(GeomError::NoFiniteRoot(t));
    }
    Ok(t.atanh())
}

pub fn soddy_radius(rj: f64, rk: f64, rl: f64, g: Geometry) -> Result<f64, GeomError> {
    match g {
        Geometry::Euclidean => soddy_radius_euclidean(rj, rk, rl),
        Geometry::Hyperbolic => soddy_radius_hyperbolic(rj, rk, rl),
    }
}

/// Boundary value for vertex `mu` given the other three radii of `r`.
pub fn boundary_for(r: &TetRadii, mu: usize, g: Geometry) -> Result<f64, GeomError> {
    let r = r.get();
    let others: Vec<f64> = (0..4).filter(|&v| v != mu).map(|v| r[v]).collect();
    soddy_radius(others[0], others[1], others[2], g)
}

/// Relative slack used only when the exact membership test finds no set,
/// which happens when `Q` rounds to a non-positive value at a point of `∂Ω`.
const MEMBERSHIP_SLACK: f64 = 1e-9;

pub fn classify(r: &TetRadii, g: Geometry) -> Result<RegionLabel, GeomError> {
    let q = q_value(r, g);
    if q > 0.0 {
        return Ok(RegionLabel::Admissible);
    }
    let radii = r.get();
    let mut bounds = [0.0; 4];
    for (mu, slot) in bounds.iter_mut().enumerate() {
        *slot = boundary_for(r, mu, g)?;
    }
    let members = |slack: f64| -> Vec<usize> {
        (0..4)
            .filter(|&mu| radii[mu] <= bounds[mu] * (1.0 + slack))
            .collect()
    };
    let mut found = members(0.0);
    if found.is_empty() {
        found = members(MEMBERSHIP_SLACK);
    }
    match found.as_slice() {
        [mu] => Ok(RegionLabel::Degenerate(*mu)),
        _ => Err(GeomError::InvariantViolation {
            q,
            matches: found.len(),
        }),
    }
}

/// Solid angles extended continuously by constants to all positive radii.
pub fn extended_solid_angles(r: &TetRadii, g: Geometry) -> Result<[f64; 4], GeomError> {
    match classify(r, g)? {
        RegionLabel::Admissible => Ok(solid_angles(r, g)?.solid_angles),
        RegionLabel::Degenerate(mu) => {
            let mut out = [0.0; 4];
            out[mu] = 2.0 * PI;
            Ok(out)
        }
    }
}
