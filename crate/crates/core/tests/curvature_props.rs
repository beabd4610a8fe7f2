mod common;

use std::f64::consts::PI;

use common::*;
use nalgebra::DVector;
use spherepack::curvature::{
    alpha_curvature, curvature_jacobian, extended_curvature, scalar_curvature, total_action,
};
use spherepack::rigidity::sample_admissible;
use spherepack::Geometry::{self, Euclidean, Hyperbolic};
use spherepack::{Complex, PackingError, PackingMetric};

fn regular_k() -> f64 {
    8.0 * PI - 12.0 * (1.0f64 / 3.0).acos()
}

fn metric(r: &[f64], g: Geometry) -> PackingMetric {
    PackingMetric::new(r.to_vec(), g).unwrap()
}

#[test]
fn regular_boundary_simplex_values() {
    let c = Complex::boundary_4_simplex();
    let k = scalar_curvature(&c, &PackingMetric::uniform(5, 1.0, Euclidean)).unwrap();
    assert!(k.values.iter().all(|x| (x - regular_k()).abs() <= 1e-9));
    assert!((regular_k() - 10.3612284).abs() < 5e-7);

    let k3 = scalar_curvature(&c, &PackingMetric::uniform(5, 3.0, Euclidean)).unwrap();
    for (a, b) in k.values.iter().zip(&k3.values) {
        assert!((a - b).abs() <= 1e-12);
    }

    let kh = scalar_curvature(&c, &PackingMetric::uniform(5, 1.0, Hyperbolic)).unwrap();
    assert!(kh.values.iter().all(|x| *x > regular_k() && (x - kh.values[0]).abs() < 1e-13));

    let s = total_action(&c, &PackingMetric::uniform(5, 1.0, Euclidean)).unwrap();
    assert!((s - 5.0 * regular_k()).abs() <= 1e-9);
    assert!((s - 51.806142).abs() < 1e-5);
}

#[test]
fn alpha_curvature_scaling() {
    let c = Complex::boundary_4_simplex();
    let r = [1.0, 1.1, 0.9, 1.05, 0.95];
    let ones = alpha_curvature(&c, &PackingMetric::uniform(5, 1.0, Euclidean), 2.0).unwrap();
    assert!(ones.values.iter().all(|x| (x - regular_k()).abs() <= 1e-9));
    let a = alpha_curvature(&c, &metric(&r, Euclidean), 2.0).unwrap();
    let b = alpha_curvature(&c, &metric(&r, Euclidean).scaled(2.0), 2.0).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((y - x / 4.0).abs() <= 1e-12);
    }
    let k = scalar_curvature(&c, &metric(&r, Hyperbolic)).unwrap();
    let h = alpha_curvature(&c, &metric(&r, Hyperbolic), -2.0).unwrap();
    for i in 0..5 {
        let s = (0.5 * r[i]).tanh();
        assert!((h.values[i] - k.values[i] * s * s).abs() <= 1e-12);
    }
}

#[test]
fn total_action_is_homogeneous_with_curvature_gradient() {
    let c = Complex::boundary_4_simplex();
    let mut rng = rng(31);
    let m = sample_admissible(&c, Euclidean, 0.5, 2.0, &mut rng).unwrap();
    let s = total_action(&c, &m).unwrap();
    assert!((total_action(&c, &m.scaled(2.0)).unwrap() - 2.0 * s).abs() <= 1e-12 * s.abs());
    let k = scalar_curvature(&c, &m).unwrap().values;
    for i in 0..5 {
        let h = 1e-6 * m.radii[i];
        let (mut p, mut q) = (m.clone(), m.clone());
        p.radii[i] += h;
        q.radii[i] -= h;
        let fd = (total_action(&c, &p).unwrap() - total_action(&c, &q).unwrap()) / (2.0 * h);
        assert!((fd - k[i]).abs() <= 1e-6, "{fd} vs {}", k[i]);
    }
    let hyper = PackingMetric::uniform(5, 1.0, Hyperbolic);
    assert!(total_action(&c, &hyper).is_err());
}

fn fd_lambda(c: &Complex, m: &PackingMetric) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut out = vec![vec![0.0; n]; n];
    for j in 0..n {
        let h = (1e-6 * m.radii[j]).max(1e-6);
        let (mut p, mut q) = (m.clone(), m.clone());
        p.radii[j] += h;
        q.radii[j] -= h;
        let kp = scalar_curvature(c, &p).unwrap().values;
        let kq = scalar_curvature(c, &q).unwrap().values;
        for i in 0..n {
            out[i][j] = (kp[i] - kq[i]) / (2.0 * h);
        }
    }
    out
}

#[test]
fn lambda_matches_finite_differences() {
    let mut rng = rng(32);
    for c in [Complex::boundary_4_simplex(), sixteen_cell()] {
        for g in [Euclidean, Hyperbolic] {
            for _ in 0..10 {
                let m = sample_admissible(&c, g, 0.5, 2.0, &mut rng).unwrap();
                let jac = curvature_jacobian(&c, &m).unwrap();
                let fd = fd_lambda(&c, &m);
                for i in 0..m.len() {
                    for j in 0..m.len() {
                        assert!((jac.matrix[(i, j)] - fd[i][j]).abs() <= 1e-5);
                    }
                }
                assert!(jac.symmetry_residual <= 1e-7);
            }
        }
    }
}

#[test]
fn lambda_spectral_certificate() {
    let c = Complex::boundary_4_simplex();
    let mut rng = rng(33);
    for _ in 0..50 {
        let m = sample_admissible(&c, Euclidean, 0.5, 2.0, &mut rng).unwrap();
        let jac = curvature_jacobian(&c, &m).unwrap();
        let zeros = jac.eigenvalues.iter().filter(|e| e.abs() <= 1e-7).count();
        assert_eq!(zeros, 1, "{:?}", jac.eigenvalues);
        assert!(jac.eigenvalues[1..].iter().all(|&e| e > 0.0));
        assert!(jac.kernel_alignment(&m.radii) >= 1.0 - 1e-8);
        assert!(jac.kernel_residual.unwrap() <= 1e-7);
        let lr = &jac.matrix * DVector::from_column_slice(&m.radii);
        assert!(lr.amax() <= 1e-7);

        let m = sample_admissible(&c, Hyperbolic, 0.5, 2.0, &mut rng).unwrap();
        let jac = curvature_jacobian(&c, &m).unwrap();
        assert!(jac.eigenvalues.iter().all(|&e| e > 0.0), "{:?}", jac.eigenvalues);
        assert!(jac.kernel_residual.is_none());
    }
}

#[test]
fn larger_mesh_spectrum() {
    let c = sixteen_cell();
    let mut rng = rng(34);
    let m = sample_admissible(&c, Euclidean, 0.5, 2.0, &mut rng).unwrap();
    let jac = curvature_jacobian(&c, &m).unwrap();
    assert!(jac.eigenvalues[0].abs() <= 1e-7 && jac.eigenvalues[1] > 0.0);
    assert!(jac.kernel_alignment(&m.radii) >= 1.0 - 1e-8);
    let m = sample_admissible(&c, Hyperbolic, 0.5, 2.0, &mut rng).unwrap();
    assert!(curvature_jacobian(&c, &m).unwrap().eigenvalues[0] > 0.0);
}

#[test]
fn extended_equals_scalar_on_admissible_metrics() {
    let c = sixteen_cell();
    let mut rng = rng(35);
    for g in [Euclidean, Hyperbolic] {
        for _ in 0..20 {
            let m = sample_admissible(&c, g, 0.5, 2.0, &mut rng).unwrap();
            assert_eq!(
                extended_curvature(&c, &m).unwrap().values,
                scalar_curvature(&c, &m).unwrap().values
            );
        }
    }
}

#[test]
fn inadmissible_and_shape_errors() {
    let c = Complex::boundary_4_simplex();
    let crushed = metric(&[1e-3, 1.0, 1.0, 1.0, 1.0], Euclidean);
    assert!(matches!(
        scalar_curvature(&c, &crushed),
        Err(PackingError::InadmissibleTet { .. })
    ));
    let k = extended_curvature(&c, &crushed).unwrap().values;
    // Vertex 0 is crushed in its 4 tetrahedra: 4π − 4·2π.
    assert!((k[0] + 4.0 * PI).abs() <= 1e-12);
    assert!(matches!(
        scalar_curvature(&c, &PackingMetric::uniform(4, 1.0, Euclidean)),
        Err(PackingError::LengthMismatch { .. })
    ));
    let open = Complex::new(4, vec![[0, 1, 2, 3]]).unwrap();
    assert!(matches!(
        scalar_curvature(&open, &PackingMetric::uniform(4, 1.0, Euclidean)),
        Err(PackingError::NotClosed(4))
    ));
}

#[test]
fn off_diagonal_sign_pattern_is_recorded_only() {
    // Entries ∂K_i/∂r_j for adjacent i, j may take either sign; collect them
    // without asserting a sign.
    let c = Complex::boundary_4_simplex();
    let mut rng = rng(36);
    let mut signs = [0usize; 2];
    for _ in 0..20 {
        let m = sample_admissible(&c, Euclidean, 0.5, 2.0, &mut rng).unwrap();
        let jac = curvature_jacobian(&c, &m).unwrap();
        for i in 0..5 {
            for j in (0..5).filter(|&j| j != i) {
                signs[(jac.matrix[(i, j)] >= 0.0) as usize] += 1;
            }
        }
    }
    assert_eq!(signs[0] + signs[1], 20 * 20);
}
