//! Prescribed-curvature solving on the extended Ricci potential.
//!
//! For a target `R̄` and parameter `α` the potential `F̃` has gradient
//! `K̃_i − R̄_i s_i^α`. It is convex and `C¹` on all positive radii when
//! `α R̄ ≤ 0`, and smooth inside the admissible space with Hessian
//! `Λ − diag(α R̄_i s_i^{α−1} s_i')`. Values of `F̃` are obtained by line
//! integrals of the gradient.
//!
//! [`solve_prescribed`] takes damped Newton steps while the iterate is
//! admissible and Armijo gradient steps otherwise. In the Euclidean case
//! with `α R̄ ≡ 0` the curvature is scale invariant, so steps are restricted
//! to the complement of the radius direction and every iterate is rescaled
//! to the initial `Σ r_i²`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::complex::Complex;
use crate::curvature::{check_pair, curvature_jacobian, extended_curvature, is_admissible, PackingMetric};
use crate::error::PackingError;
use crate::quadrature::{integrate_unit_with_breaks, QuadratureOptions};
use crate::tetgeom::{conformal_factor, q_value, Geometry, TetRadii};

/// Target curvature together with the sign flags that decide which
/// uniqueness statement applies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrescribedTarget {
    pub target: Vec<f64>,
    pub alpha: f64,
    pub geometry: Geometry,
    /// `α R̄_i ≤ 0` for every vertex.
    pub alpha_r_nonpositive: bool,
    /// `α R̄_i = 0` for every vertex.
    pub alpha_r_zero: bool,
}

impl PrescribedTarget {
    pub fn new(target: Vec<f64>, alpha: f64, geometry: Geometry) -> Result<Self, PackingError> {
        if let Some(bad) = target.iter().find(|x| !x.is_finite()) {
            return Err(PackingError::Numeric(format!("non-finite target entry {bad}")));
        }
        let alpha_r_nonpositive = target.iter().all(|&r| alpha * r <= 0.0);
        let alpha_r_zero = target.iter().all(|&r| alpha * r == 0.0);
        Ok(Self {
            target,
            alpha,
            geometry,
            alpha_r_nonpositive,
            alpha_r_zero,
        })
    }

    /// Euclidean with `α R̄ ≡ 0`: solutions are unique only up to scaling.
    pub fn has_scale_gauge(&self) -> bool {
        self.geometry == Geometry::Euclidean && self.alpha_r_zero
    }

    /// `R̄_i s_i^α` and its derivative in `r_i`.
    fn prescribed_term(&self, i: usize, r: f64) -> (f64, f64) {
        let (s, ds) = conformal_factor(r, self.geometry);
        if self.alpha == 0.0 {
            return (self.target[i], 0.0);
        }
        let sa = s.powf(self.alpha);
        let value = self.target[i] * sa;
        (value, self.alpha * value / s * ds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    SumSquaresFixed,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArmijoParams {
    pub c1: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub normalization: Normalization,
    pub initial_radii: Vec<f64>,
    pub step_control: ArmijoParams,
    pub rng_seed: u64,
    /// Largest relative radius change of the first trial gradient step.
    pub max_relative_step: f64,
}

impl SolveOptions {
    /// Defaults, with the normalization chosen from the target's gauge.
    pub fn new(initial_radii: Vec<f64>, target: &PrescribedTarget) -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-9,
            normalization: if target.has_scale_gauge() {
                Normalization::SumSquaresFixed
            } else {
                Normalization::None
            },
            initial_radii,
            step_control: ArmijoParams::default(),
            rng_seed: 0,
            max_relative_step: 0.5,
        }
    }

    fn validate(&self) -> Result<(), PackingError> {
        let a = &self.step_control;
        if !(self.gradient_tolerance > 0.0)
            || !(a.c1 > 0.0 && a.c1 < 1.0)
            || !(a.backtrack > 0.0 && a.backtrack < 1.0)
            || !(self.max_relative_step > 0.0)
        {
            return Err(PackingError::Numeric(format!("invalid solve options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Start,
    Newton,
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub gradient_norm: f64,
    /// `F̃` relative to the initial metric.
    pub potential: f64,
    /// The step that produced this iterate.
    pub step: StepKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveOutcome {
    Converged,
    /// Gradient vanishes but some tetrahedron is degenerate.
    ExtendedCriticalPoint,
    IterationLimit,
    /// No step satisfied the line-search conditions.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub radii: Vec<f64>,
    pub converged: bool,
    pub outcome: SolveOutcome,
    pub final_gradient_norm: f64,
    pub iterations: usize,
    pub trajectory_summary: Vec<TrajectoryPoint>,
}

fn check_target(c: &Complex, t: &PrescribedTarget) -> Result<(), PackingError> {
    if t.target.len() != c.vertex_count() {
        return Err(PackingError::LengthMismatch {
            expected: c.vertex_count(),
            got: t.target.len(),
        });
    }
    Ok(())
}

/// `∇F̃_i = K̃_i − R̄_i s_i^α`; defined for every positive metric.
pub fn potential_gradient(
    c: &Complex,
    m: &PackingMetric,
    t: &PrescribedTarget,
) -> Result<Vec<f64>, PackingError> {
    check_target(c, t)?;
    let k = extended_curvature(c, m)?;
    Ok(k.values
        .iter()
        .zip(&m.radii)
        .enumerate()
        .map(|(i, (ki, &r))| ki - t.prescribed_term(i, r).0)
        .collect())
}

/// `F̃(to) − F̃(from)` as the line integral of the gradient along the segment.
pub fn potential_difference(
    c: &Complex,
    from: &PackingMetric,
    to: &PackingMetric,
    t: &PrescribedTarget,
) -> Result<f64, PackingError> {
    check_pair(c, from)?;
    check_pair(c, to)?;
    let delta: Vec<f64> = to.radii.iter().zip(&from.radii).map(|(b, a)| b - a).collect();
    if delta.iter().all(|d| *d == 0.0) {
        return Ok(0.0);
    }
    let mut point = from.clone();
    let integrand = |s: f64| {
        for ((p, a), d) in point.radii.iter_mut().zip(&from.radii).zip(&delta) {
            *p = a + s * d;
        }
        let g = potential_gradient(c, &point, t)?;
        Ok(g.iter().zip(&delta).map(|(g, d)| g * d).sum())
    };
    // Each integrand value carries roundoff of order ε·4π·Σ|δ_i| from the
    // curvature sums; tolerances below that level cannot be met.
    let opts = QuadratureOptions {
        abs_tol: 1e-13 * 4.0 * std::f64::consts::PI * delta.iter().map(|d| d.abs()).sum::<f64>()
            * c.vertex_count() as f64,
        ..QuadratureOptions::default()
    };
    let breaks = boundary_crossings(c, from, &delta);
    Ok(integrate_unit_with_breaks(integrand, &breaks, &opts)?.value)
}

const CROSSING_SAMPLES: usize = 128;

/// Parameters in `(0, 1)` where some tetrahedron crosses `Q = 0` along
/// `from + s·delta`, located by sampling and bisection.
fn boundary_crossings(c: &Complex, from: &PackingMetric, delta: &[f64]) -> Vec<f64> {
    let g = from.geometry;
    let q_at = |tet: &[usize; 4], s: f64| {
        let r = tet.map(|v| from.radii[v] + s * delta[v]);
        TetRadii::new(r).map_or(f64::NAN, |r| q_value(&r, g))
    };
    let mut out = Vec::new();
    for tet in c.tetrahedra() {
        let mut prev = (0.0, q_at(tet, 0.0));
        for k in 1..=CROSSING_SAMPLES {
            let s = k as f64 / CROSSING_SAMPLES as f64;
            let cur = (s, q_at(tet, s));
            if (prev.1 > 0.0) != (cur.1 > 0.0) {
                let (mut lo, mut hi) = (prev.0, cur.0);
                let inside_lo = prev.1 > 0.0;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if (q_at(tet, mid) > 0.0) == inside_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
            prev = cur;
        }
    }
    out
}

/// `F̃(m)` normalized by `F̃(reference) = 0`; the reference must be admissible.
pub fn potential_value(
    c: &Complex,
    m: &PackingMetric,
    t: &PrescribedTarget,
    reference: &PackingMetric,
) -> Result<f64, PackingError> {
    if !is_admissible(c, reference)? {
        return Err(PackingError::Numeric(
            "potential reference metric must be admissible".into(),
        ));
    }
    potential_difference(c, reference, m, t)
}

/// `Hess F̃ = Λ − diag(d/dr_i [R̄_i s_i^α])` at an admissible metric.
pub fn potential_hessian(
    c: &Complex,
    m: &PackingMetric,
    t: &PrescribedTarget,
) -> Result<DMatrix<f64>, PackingError> {
    check_target(c, t)?;
    let mut h = curvature_jacobian(c, m)?.matrix;
    for (i, &r) in m.radii.iter().enumerate() {
        h[(i, i)] -= t.prescribed_term(i, r).1;
    }
    Ok(h)
}

/// Orthonormal basis of the complement of `r` as the trailing columns of a
/// Householder reflection mapping `r̂` to a multiple of `e_0`.
fn complement_basis(r: &[f64]) -> DMatrix<f64> {
    let n = r.len();
    let rv = DVector::from_column_slice(r).normalize();
    let mut w = rv.clone();
    w[0] += if rv[0] >= 0.0 { 1.0 } else { -1.0 };
    let reflect = DMatrix::identity(n, n) - (&w * w.transpose()) * (2.0 / w.norm_squared());
    reflect.columns(1, n - 1).into_owned()
}

fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>, gauge: Option<&[f64]>) -> Option<DVector<f64>> {
    match gauge {
        Some(r) => {
            let u = complement_basis(r);
            let reduced = u.transpose() * &h * &u;
            let y = reduced.cholesky()?.solve(&(-(u.transpose() * g)));
            Some(u * y)
        }
        None => Some(h.cholesky()?.solve(&(-g))),
    }
}

fn project_out(v: &DVector<f64>, r: &[f64]) -> DVector<f64> {
    let rv = DVector::from_column_slice(r);
    v - &rv * (v.dot(&rv) / rv.norm_squared())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct StepOutcome {
    radii: Vec<f64>,
    decrease: f64,
}

/// Backtracking over `r + τ d` (rescaled when `norm` is set) with the
/// Armijo condition on the potential difference.
#[allow(clippy::too_many_arguments)]
fn line_search(
    c: &Complex,
    t: &PrescribedTarget,
    current: &PackingMetric,
    g: &DVector<f64>,
    d: &DVector<f64>,
    mut tau: f64,
    require_admissible: bool,
    norm: Option<f64>,
    params: &ArmijoParams,
) -> Result<Option<StepOutcome>, PackingError> {
    let slope = g.dot(d);
    for _ in 0..=params.max_backtracks {
        let mut trial: Vec<f64> = current
            .radii
            .iter()
            .zip(d.iter())
            .map(|(r, di)| r + tau * di)
            .collect();
        if trial.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            tau *= params.backtrack;
            continue;
        }
        if let Some(target_norm) = norm {
            let s = target_norm / trial.iter().map(|x| x * x).sum::<f64>().sqrt();
            trial.iter_mut().for_each(|x| *x *= s);
        }
        let trial = PackingMetric {
            radii: trial,
            geometry: current.geometry,
        };
        if require_admissible && !is_admissible(c, &trial)? {
            tau *= params.backtrack;
            continue;
        }
        let decrease = potential_difference(c, current, &trial, t)?;
        if decrease <= params.c1 * tau * slope {
            return Ok(Some(StepOutcome {
                radii: trial.radii,
                decrease,
            }));
        }
        tau *= params.backtrack;
    }
    Ok(None)
}

/// Minimizes `F̃` for the prescribed target.
pub fn solve_prescribed(
    c: &Complex,
    t: &PrescribedTarget,
    opts: &SolveOptions,
) -> Result<SolveResult, PackingError> {
    opts.validate()?;
    check_target(c, t)?;
    let mut m = PackingMetric::new(opts.initial_radii.clone(), t.geometry)?;
    check_pair(c, &m)?;

    let gauge = t.has_scale_gauge();
    let norm = (opts.normalization == Normalization::SumSquaresFixed)
        .then(|| m.radii.iter().map(|x| x * x).sum::<f64>().sqrt());
    let mut potential = 0.0;
    let mut trajectory = Vec::new();
    let mut last_step = StepKind::Start;

    for iteration in 0..=opts.max_iterations {
        let grad = potential_gradient(c, &m, t)?;
        let gnorm = inf_norm(&grad);
        if !gnorm.is_finite() {
            return Err(PackingError::Numeric(format!("non-finite gradient at iteration {iteration}")));
        }
        trajectory.push(TrajectoryPoint {
            iteration,
            gradient_norm: gnorm,
            potential,
            step: last_step,
        });
        let admissible = is_admissible(c, &m)?;
        let finish = |outcome| SolveResult {
            radii: m.radii.clone(),
            converged: outcome == SolveOutcome::Converged,
            outcome,
            final_gradient_norm: gnorm,
            iterations: iteration,
            trajectory_summary: trajectory.clone(),
        };
        if gnorm <= opts.gradient_tolerance {
            return Ok(finish(if admissible {
                SolveOutcome::Converged
            } else {
                SolveOutcome::ExtendedCriticalPoint
            }));
        }
        if iteration == opts.max_iterations {
            return Ok(finish(SolveOutcome::IterationLimit));
        }

        let g = DVector::from_vec(grad);
        let gauge_radii = gauge.then_some(m.radii.as_slice());
        let mut accepted = None;
        if admissible {
            let h = potential_hessian(c, &m, t)?;
            if let Some(d) = newton_direction(h, &g, gauge_radii) {
                if g.dot(&d) < 0.0 {
                    accepted = line_search(c, t, &m, &g, &d, 1.0, true, norm, &opts.step_control)?
                        .map(|s| (s, StepKind::Newton));
                }
            }
        }
        if accepted.is_none() {
            let d = match gauge_radii {
                Some(r) => -project_out(&g, r),
                None => -g.clone(),
            };
            let rel = d
                .iter()
                .zip(&m.radii)
                .fold(0.0f64, |acc, (di, r)| acc.max(di.abs() / r));
            if rel > 0.0 {
                let tau = (opts.max_relative_step / rel).min(1.0);
                accepted = line_search(c, t, &m, &g, &d, tau, false, norm, &opts.step_control)?
                    .map(|s| (s, StepKind::Gradient));
            }
        }
        match accepted {
            Some((step, kind)) => {
                potential += step.decrease;
                m.radii = step.radii;
                last_step = kind;
            }
            None => return Ok(finish(SolveOutcome::Stalled)),
        }
    }
    unreachable!("loop returns at the iteration limit")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::scalar_curvature;

    #[test]
    fn gradient_at_exact_solution_vanishes() {
        let c = Complex::boundary_4_simplex();
        let m = PackingMetric::new(vec![1.0, 1.1, 0.9, 1.05, 0.95], Geometry::Euclidean).unwrap();
        let k = scalar_curvature(&c, &m).unwrap().values;
        let t = PrescribedTarget::new(k, 0.0, Geometry::Euclidean).unwrap();
        let g = potential_gradient(&c, &m, &t).unwrap();
        assert!(inf_norm(&g) < 1e-12);
        assert!(t.has_scale_gauge());
    }

    #[test]
    fn zero_target_gradient_is_curvature() {
        let c = Complex::boundary_4_simplex();
        let m = PackingMetric::uniform(5, 1.0, Geometry::Euclidean);
        let t = PrescribedTarget::new(vec![0.0; 5], 0.0, Geometry::Euclidean).unwrap();
        let g = potential_gradient(&c, &m, &t).unwrap();
        assert!(g.iter().all(|x| (x - 10.3612284).abs() < 5e-7));
        assert_eq!(potential_value(&c, &m, &t, &m).unwrap(), 0.0);
    }

    #[test]
    fn crushed_vertex_gradient_is_finite() {
        let c = Complex::boundary_4_simplex();
        let m = PackingMetric::new(vec![1e-3, 1.0, 1.0, 1.0, 1.0], Geometry::Euclidean).unwrap();
        let t = PrescribedTarget::new(vec![0.5; 5], 0.0, Geometry::Euclidean).unwrap();
        let g = potential_gradient(&c, &m, &t).unwrap();
        assert!((g[0] - (-4.0 * std::f64::consts::PI - 0.5)).abs() < 1e-12);
        assert!(g.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn complement_basis_is_orthonormal() {
        let r = [1.0, 2.0, 0.5, 1.5, 0.7];
        let u = complement_basis(&r);
        let gram = u.transpose() * &u;
        assert!((gram - DMatrix::identity(4, 4)).amax() < 1e-14);
        let rv = DVector::from_column_slice(&r);
        assert!((u.transpose() * rv).amax() < 1e-14);
    }

    #[test]
    fn hypothesis_flags() {
        let t = PrescribedTarget::new(vec![1.0, 2.0], -2.0, Geometry::Euclidean).unwrap();
        assert!(t.alpha_r_nonpositive && !t.alpha_r_zero && !t.has_scale_gauge());
        let t = PrescribedTarget::new(vec![1.0, -2.0], 1.0, Geometry::Euclidean).unwrap();
        assert!(!t.alpha_r_nonpositive);
        let t = PrescribedTarget::new(vec![0.0, 0.0], 1.0, Geometry::Hyperbolic).unwrap();
        assert!(t.alpha_r_zero && !t.has_scale_gauge());
        assert!(PrescribedTarget::new(vec![f64::NAN], 0.0, Geometry::Euclidean).is_err());
    }
}
