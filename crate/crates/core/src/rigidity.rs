//! Numerical rigidity certificates.
//!
//! [`rigidity_certificate`] checks the spectral property of the potential's
//! Hessian that forces uniqueness: a one-dimensional kernel along `r` in the
//! Euclidean scale-invariant case, positive definiteness otherwise.
//! [`rigidity_experiment`] recovers a known metric from many random starts
//! and measures how far apart the recovered metrics are.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::Complex;
use crate::curvature::{alpha_curvature, check_pair, is_admissible, sorted_eigen, PackingMetric};
use crate::error::PackingError;
use crate::solver::{
    potential_hessian, solve_prescribed, PrescribedTarget, SolveOptions, SolveOutcome,
    TrajectoryPoint,
};
use crate::tetgeom::Geometry;

/// Eigenvalues with `|λ|` at most this are counted as zero.
pub const KERNEL_TOL: f64 = 1e-7;
/// Eigenvalues must exceed this to count as positive.
pub const POSITIVE_TOL: f64 = 1e-10;
/// Required `|cos|` between the kernel eigenvector and `r`.
pub const KERNEL_ALIGNMENT_TOL: f64 = 1e-8;
/// Largest pairwise distance between recovered metrics for a PASS.
pub const RECOVERY_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Euclidean, `α R̄ ≡ 0`: expect PSD with kernel spanned by `r`.
    ScaleKernel,
    /// `α R̄ ≤ 0` otherwise: expect positive definite.
    PositiveDefinite,
    /// Some `α R̄_i > 0`; no uniqueness statement applies.
    OutsideHypotheses,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityCertificate {
    pub regime: Regime,
    pub eigenvalues: Vec<f64>,
    pub zero_eigenvalues: usize,
    /// `|cos|` between the eigenvector of the smallest eigenvalue and `r`.
    pub kernel_alignment: f64,
    pub certified: bool,
}

pub fn rigidity_certificate(
    c: &Complex,
    m: &PackingMetric,
    t: &PrescribedTarget,
) -> Result<RigidityCertificate, PackingError> {
    check_pair(c, m)?;
    let h = potential_hessian(c, m, t)?;
    let (eigenvalues, vectors) = sorted_eigen(&h);
    let v0 = vectors.column(0);
    let r = nalgebra::DVector::from_column_slice(&m.radii);
    let kernel_alignment = (v0.dot(&r) / (v0.norm() * r.norm())).abs();
    let zero_eigenvalues = eigenvalues.iter().filter(|e| e.abs() <= KERNEL_TOL).count();

    let regime = if t.has_scale_gauge() {
        Regime::ScaleKernel
    } else if t.alpha_r_nonpositive {
        Regime::PositiveDefinite
    } else {
        Regime::OutsideHypotheses
    };
    let certified = match regime {
        Regime::ScaleKernel => {
            zero_eigenvalues == 1
                && eigenvalues[0].abs() <= KERNEL_TOL
                && eigenvalues[1..].iter().all(|&e| e > POSITIVE_TOL)
                && kernel_alignment >= 1.0 - KERNEL_ALIGNMENT_TOL
        }
        Regime::PositiveDefinite => eigenvalues.iter().all(|&e| e > POSITIVE_TOL),
        Regime::OutsideHypotheses => false,
    };
    Ok(RigidityCertificate {
        regime,
        eigenvalues,
        zero_eigenvalues,
        kernel_alignment,
        certified,
    })
}

/// Draws radii log-uniformly in `[lo, hi]` until every tetrahedron is
/// admissible.
pub fn sample_admissible(
    c: &Complex,
    g: Geometry,
    lo: f64,
    hi: f64,
    rng: &mut impl Rng,
) -> Result<PackingMetric, PackingError> {
    let (a, b) = (lo.ln(), hi.ln());
    for _ in 0..10_000 {
        let radii = (0..c.vertex_count())
            .map(|_| rng.random_range(a..=b).exp())
            .collect();
        let m = PackingMetric { radii, geometry: g };
        if is_admissible(c, &m)? {
            return Ok(m);
        }
    }
    Err(PackingError::Numeric(
        "no admissible metric found by rejection sampling".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub index: usize,
    pub initial: Vec<f64>,
    pub radii: Vec<f64>,
    pub outcome: SolveOutcome,
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub distance_to_truth: f64,
    /// Only kept for trials that did not converge.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub geometry: Geometry,
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    pub gradient_tolerance: f64,
    pub ground_truth: Vec<f64>,
    pub target: PrescribedTarget,
    /// Recovered metrics are rescaled to the norm of the ground truth before
    /// comparison.
    pub scale_normalized: bool,
    pub certificate: RigidityCertificate,
    pub results: Vec<TrialReport>,
    pub max_pairwise_distance: f64,
    pub max_distance_to_truth: f64,
    pub passed: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub seed: u64,
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// Log-uniform sampling range for ground truth and starting metrics.
    pub radius_range: (f64, f64),
}

impl ExperimentConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            gradient_tolerance: 1e-9,
            max_iterations: 500,
            radius_range: (0.5, 2.0),
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn rescale(r: &[f64], norm: f64) -> Vec<f64> {
    let s = norm / r.iter().map(|x| x * x).sum::<f64>().sqrt();
    r.iter().map(|x| x * s).collect()
}

pub fn rigidity_experiment(
    c: &Complex,
    g: Geometry,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<ExperimentReport, PackingError> {
    rigidity_experiment_with(c, g, alpha, &ExperimentConfig::new(trials, seed))
}

/// Samples a ground truth, prescribes its α-curvature and solves from
/// `cfg.trials` random admissible starts.
pub fn rigidity_experiment_with(
    c: &Complex,
    g: Geometry,
    alpha: f64,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, PackingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = cfg.radius_range;
    let truth = sample_admissible(c, g, lo, hi, &mut rng)?;
    let target = PrescribedTarget::new(alpha_curvature(c, &truth, alpha)?.values, alpha, g)?;
    let certificate = rigidity_certificate(c, &truth, &target)?;
    let starts = (0..cfg.trials)
        .map(|_| sample_admissible(c, g, lo, hi, &mut rng).map(|m| m.radii))
        .collect::<Result<Vec<_>, _>>()?;

    let normalized = target.has_scale_gauge();
    let truth_norm = truth.radii.iter().map(|x| x * x).sum::<f64>().sqrt();
    let results = starts
        .par_iter()
        .enumerate()
        .map(|(index, init)| {
            let mut opts = SolveOptions::new(init.clone(), &target);
            opts.gradient_tolerance = cfg.gradient_tolerance;
            opts.max_iterations = cfg.max_iterations;
            opts.rng_seed = cfg.seed;
            let res = solve_prescribed(c, &target, &opts)?;
            let radii = if normalized {
                rescale(&res.radii, truth_norm)
            } else {
                res.radii.clone()
            };
            Ok(TrialReport {
                index,
                initial: init.clone(),
                distance_to_truth: distance(&radii, &truth.radii),
                radii,
                outcome: res.outcome,
                converged: res.converged,
                iterations: res.iterations,
                final_gradient_norm: res.final_gradient_norm,
                trajectory: (!res.converged).then_some(res.trajectory_summary),
            })
        })
        .collect::<Result<Vec<_>, PackingError>>()?;

    let mut max_pairwise: f64 = 0.0;
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            max_pairwise = max_pairwise.max(distance(&a.radii, &b.radii));
        }
    }
    let max_truth = results
        .iter()
        .fold(0.0f64, |m, r| m.max(r.distance_to_truth));
    let all_converged = results.iter().all(|r| r.converged);
    let passed = all_converged && max_pairwise <= RECOVERY_TOL;
    let verdict = if passed {
        if normalized {
            "PASS: unique up to scaling".to_string()
        } else {
            "PASS: unique".to_string()
        }
    } else if !all_converged {
        let failed = results.iter().filter(|r| !r.converged).count();
        format!("FAIL: {failed} trials did not converge (target possibly non-admissible)")
    } else {
        format!("FAIL: recovered metrics differ by {max_pairwise:e}")
    };

    Ok(ExperimentReport {
        geometry: g,
        alpha,
        trials: cfg.trials,
        seed: cfg.seed,
        gradient_tolerance: cfg.gradient_tolerance,
        ground_truth: truth.radii,
        target,
        scale_normalized: normalized,
        certificate,
        results,
        max_pairwise_distance: max_pairwise,
        max_distance_to_truth: max_truth,
        passed,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::scalar_curvature;

    #[test]
    fn regular_certificates() {
        let c = Complex::boundary_4_simplex();
        let m = PackingMetric::uniform(5, 1.0, Geometry::Euclidean);
        let k = scalar_curvature(&c, &m).unwrap().values;
        let t0 = PrescribedTarget::new(k.clone(), 0.0, Geometry::Euclidean).unwrap();
        let cert = rigidity_certificate(&c, &m, &t0).unwrap();
        assert_eq!(cert.regime, Regime::ScaleKernel);
        assert!(cert.certified, "{cert:?}");

        let r2 = alpha_curvature(&c, &m, -2.0).unwrap().values;
        let t2 = PrescribedTarget::new(r2, -2.0, Geometry::Euclidean).unwrap();
        let cert = rigidity_certificate(&c, &m, &t2).unwrap();
        assert_eq!(cert.regime, Regime::PositiveDefinite);
        assert!(cert.certified && cert.eigenvalues[0] > 0.0);

        let mh = PackingMetric::uniform(5, 1.0, Geometry::Hyperbolic);
        let kh = scalar_curvature(&c, &mh).unwrap().values;
        let th = PrescribedTarget::new(kh, 0.0, Geometry::Hyperbolic).unwrap();
        assert!(rigidity_certificate(&c, &mh, &th).unwrap().certified);
    }
}
