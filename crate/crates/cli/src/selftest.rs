//! Deterministic invariant suites behind `spherepack selftest`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spherepack::curvature::{curvature_jacobian, extended_curvature, scalar_curvature};
use spherepack::degeneracy::{classify, soddy_radius, soddy_radius_euclidean, Branch, SoddyCoefficients};
use spherepack::rigidity::{rigidity_experiment, sample_admissible};
use spherepack::solver::{potential_gradient, potential_value, solve_prescribed};
use spherepack::tetgeom::{q_euclidean, q_euclidean_grouped, q_value, solid_angles, tet_jacobian};
use spherepack::Geometry::{self, Euclidean, Hyperbolic};
use spherepack::{Complex, PackingError, PackingMetric, PrescribedTarget, SolveOptions, TetRadii};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Suite {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl Suite {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check { name, passed, detail: detail.into() }
}

/// Runs `f`, turning an error into a failed check.
fn guarded(name: &'static str, f: impl FnOnce() -> Result<(bool, String), PackingError>) -> Check {
    match f() {
        Ok((passed, detail)) => check(name, passed, detail),
        Err(e) => check(name, false, format!("error: {e}")),
    }
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn tet(r: [f64; 4]) -> TetRadii {
    TetRadii::new(r).expect("sampled radii are positive")
}

fn admissible_tet(rng: &mut impl Rng, g: Geometry) -> TetRadii {
    loop {
        let r = tet([(); 4].map(|_| log_uniform(rng, 0.3, 3.0)));
        if q_value(&r, g) > 0.0 {
            return r;
        }
    }
}

pub fn run(seed: u64) -> Vec<Suite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        complex_suite(),
        tetgeom_suite(&mut rng),
        degeneracy_suite(&mut rng),
        curvature_suite(&mut rng),
        solver_suite(&mut rng, seed),
    ]
}

fn complex_suite() -> Suite {
    let d = Complex::boundary_4_simplex();
    let report = d.validate_closed();
    let c = report.counts;
    let single = Complex::new(4, vec![[0, 1, 2, 3]]).expect("valid tetrahedron");
    let open = single.validate_closed();
    let mut twice = d.tetrahedra().to_vec();
    twice.extend(d.tetrahedra().iter().map(|t| t.map(|v| v + 5)));
    let union = Complex::new(10, twice).expect("valid union").validate_closed();
    let round_trip = Complex::parse_mesh(&d.to_json()).map(|x| x == d).unwrap_or(false);
    let rejects = Complex::parse_mesh(r#"{"vertices": 4, "tetrahedra": [[0,1,1,2]]}"#).is_err()
        && Complex::parse_mesh(r#"{"vertices": 4, "tetrahedra": [[0,1,2,9]]}"#).is_err();
    Suite {
        name: "complex",
        checks: vec![
            check(
                "boundary of 4-simplex is closed",
                report.is_closed
                    && report.is_connected
                    && (c.vertices, c.edges, c.faces, c.tetrahedra) == (5, 10, 10, 5),
                format!("{c:?}"),
            ),
            check(
                "single tetrahedron is open",
                !open.is_closed && open.offending_faces.len() == 4,
                format!("{} offending faces", open.offending_faces.len()),
            ),
            check("disjoint union is disconnected", union.is_closed && !union.is_connected, ""),
            check("mesh json round trip", round_trip, ""),
            check("malformed meshes rejected", rejects, ""),
        ],
    }
}

fn tetgeom_suite(rng: &mut ChaCha8Rng) -> Suite {
    let mut worst_q = 0.0f64;
    for _ in 0..1000 {
        let r = tet([(); 4].map(|_| log_uniform(rng, 1e-3, 10.0)));
        let (a, b) = (q_euclidean(&r), q_euclidean_grouped(&r));
        // Relative to (Σ 1/r)², the size of the cancelling terms.
        let scale = r.get().iter().map(|x| 1.0 / x).sum::<f64>().powi(2);
        worst_q = worst_q.max((a - b).abs() / scale);
    }

    let regular = guarded("regular solid angle", || {
        let s = solid_angles(&tet([1.0; 4]), Euclidean)?;
        let err = (s.solid_angles[0] - (3.0 * (1.0f64 / 3.0).acos() - PI)).abs();
        Ok((err <= 1e-12, format!("error {err:.3e}")))
    });

    let excess = guarded("solid angle equals spherical excess", || {
        let mut worst = 0.0f64;
        let mut bounded = true;
        for g in [Euclidean, Hyperbolic] {
            for _ in 0..200 {
                let s = solid_angles(&admissible_tet(rng, g), g)?;
                for v in 0..4 {
                    let sum: f64 = (0..4).filter(|&w| w != v).map(|w| s.dihedral(v, w)).sum();
                    worst = worst.max((sum - PI - s.solid_angles[v]).abs());
                    bounded &= s.solid_angles[v] > 0.0 && s.solid_angles[v] < 2.0 * PI;
                }
            }
        }
        Ok((bounded && worst <= 1e-12, format!("max error {worst:.3e}")))
    });

    let concavity = guarded("single tetrahedron concavity", || {
        let mut worst_sym = 0.0f64;
        let mut worst_kernel = 0.0f64;
        let mut largest = f64::NEG_INFINITY;
        for g in [Euclidean, Hyperbolic] {
            for _ in 0..100 {
                let r = admissible_tet(rng, g);
                let j = tet_jacobian(&r, g)?;
                worst_sym = worst_sym.max(j.symmetry_residual);
                let ev = j.eigenvalues();
                if g == Euclidean {
                    let jr = j.apply(r.get());
                    worst_kernel = worst_kernel.max(jr.iter().fold(0.0f64, |m, x| m.max(x.abs())));
                    largest = largest.max(ev[2]);
                } else {
                    largest = largest.max(ev[3]);
                }
            }
        }
        Ok((
            worst_sym <= 1e-7 && worst_kernel <= 1e-7 && largest < -1e-10,
            format!("symmetry {worst_sym:.3e}, kernel {worst_kernel:.3e}, top eigenvalue {largest:.3e}"),
        ))
    });

    let jacobian_fd = guarded("jacobian matches central differences", || {
        let mut worst = 0.0f64;
        for g in [Euclidean, Hyperbolic] {
            for _ in 0..20 {
                let r = admissible_tet(rng, g);
                let j = tet_jacobian(&r, g)?;
                for nu in 0..4 {
                    let h = 1e-6 * r.get()[nu];
                    let mut p = r.get();
                    let mut q = r.get();
                    p[nu] += h;
                    q[nu] -= h;
                    let (ap, aq) = (solid_angles(&tet(p), g)?, solid_angles(&tet(q), g)?);
                    for mu in 0..4 {
                        let fd = (ap.solid_angles[mu] - aq.solid_angles[mu]) / (2.0 * h);
                        worst = worst.max((fd - j.raw[mu][nu]).abs());
                    }
                }
            }
        }
        Ok((worst <= 1e-6, format!("max error {worst:.3e}")))
    });

    let limit = guarded("degenerate limit", || {
        let f = soddy_radius_euclidean(1.0, 1.0, 1.0)?;
        let s = solid_angles(&tet([f + 1e-10, 1.0, 1.0, 1.0]), Euclidean)?;
        let ok = s.solid_angles[0] >= 2.0 * PI - 1e-3
            && s.solid_angles[1..].iter().all(|&a| a <= 1e-3)
            && (1..4).all(|v| s.dihedral(0, v) >= PI - 1e-3)
            && [(1, 2), (1, 3), (2, 3)].iter().all(|&(a, b)| s.dihedral(a, b) <= 1e-3);
        Ok((ok, format!("deficit {:.3e}", 2.0 * PI - s.solid_angles[0])))
    });

    Suite {
        name: "tetgeom",
        checks: vec![
            check("Q forms agree", worst_q <= 1e-12, format!("max scaled gap {worst_q:.3e}")),
            regular,
            excess,
            concavity,
            jacobian_fd,
            limit,
        ],
    }
}

fn degeneracy_suite(rng: &mut ChaCha8Rng) -> Suite {
    let reference = guarded("boundary reference values", || {
        let f = soddy_radius_euclidean(1.0, 1.0, 1.0)?;
        let c = SoddyCoefficients::euclidean(1.0, 4.0, 4.0)?;
        let f144 = soddy_radius_euclidean(1.0, 4.0, 4.0)?;
        let ok = (f - (2.0 / 3f64.sqrt() - 1.0)).abs() <= 1e-12
            && c.branch() == Branch::Zero
            && (f144 - 1.0 / 3.0).abs() <= 1e-12;
        Ok((ok, format!("f(1,1,1) = {f:.16}, f(1,4,4) = {f144:.16}")))
    });

    let descartes = guarded("Descartes identities on constructed zeros", || {
        let mut worst = [0.0f64; 2];
        for _ in 0..1000 {
            let [a, b, c] = [(); 3].map(|_| log_uniform(rng, 0.05, 8.0));
            for (i, g) in [Euclidean, Hyperbolic].into_iter().enumerate() {
                let x = soddy_radius(a, b, c, g)?;
                let q = q_value(&tet([x, a, b, c]), g);
                let scale = if g == Euclidean { (1.0 / x + 1.0 / a + 1.0 / b + 1.0 / c).powi(2) } else { 1.0 };
                worst[i] = worst[i].max(q.abs() / scale);
            }
        }
        Ok((
            worst[0] <= 1e-9 && worst[1] <= 1e-7,
            format!("euclidean {:.3e}, hyperbolic {:.3e}", worst[0], worst[1]),
        ))
    });

    let discriminant = guarded("discriminant identity", || {
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let [j, k, l] = [(); 3].map(|_| log_uniform(rng, 0.01, 100.0));
            let c = SoddyCoefficients::euclidean(j, k, l)?;
            let expected = 16.0 * (j * k * l).powi(3) * (j + k + l);
            worst = worst.max((c.discriminant - expected).abs() / expected);
        }
        Ok((worst <= 1e-10, format!("max relative error {worst:.3e}")))
    });

    let rejected = guarded("rejected root exceeds smallest radius", || {
        let (mut samples, mut violations) = (0, 0);
        while samples < 1000 {
            let t = [log_uniform(rng, 0.2, 5.0), log_uniform(rng, 5.0, 100.0), log_uniform(rng, 5.0, 100.0)];
            let c = SoddyCoefficients::euclidean(t[0], t[1], t[2])?;
            if c.branch() != Branch::Negative {
                continue;
            }
            samples += 1;
            violations += (c.rejected_root() <= t[0].min(t[1]).min(t[2])) as usize;
        }
        Ok((violations == 0, format!("{violations} violations in {samples}")))
    });

    let mut partition = Vec::new();
    for (name, g) in [("partition euclidean", Euclidean), ("partition hyperbolic", Hyperbolic)] {
        partition.push(guarded(name, || {
            let mut failures = 0;
            for _ in 0..10_000 {
                let r = tet([(); 4].map(|_| 10.0 * (1.0 - rng.random::<f64>())));
                failures += classify(&r, g).is_err() as usize;
            }
            Ok((failures == 0, format!("{failures} unlabelled of 10000")))
        }));
    }

    let mut checks = vec![reference, descartes, discriminant, rejected];
    checks.extend(partition);
    Suite { name: "degeneracy", checks }
}

fn curvature_suite(rng: &mut ChaCha8Rng) -> Suite {
    let c = Complex::boundary_4_simplex();
    let regular = guarded("regular curvature", || {
        let k = scalar_curvature(&c, &PackingMetric::uniform(5, 1.0, Euclidean))?;
        let expected = 8.0 * PI - 12.0 * (1.0f64 / 3.0).acos();
        let err = k.values.iter().fold(0.0f64, |m, x| m.max((x - expected).abs()));
        Ok((err <= 1e-9, format!("error {err:.3e}")))
    });
    let spectrum = guarded("Lambda spectral certificate", || {
        let mut ok = true;
        let mut worst_align = 1.0f64;
        for _ in 0..10 {
            let m = sample_admissible(&c, Euclidean, 0.5, 2.0, rng)?;
            let jac = curvature_jacobian(&c, &m)?;
            let zeros = jac.eigenvalues.iter().filter(|e| e.abs() <= 1e-7).count();
            let align = jac.kernel_alignment(&m.radii);
            worst_align = worst_align.min(align);
            ok &= zeros == 1 && jac.eigenvalues[1..].iter().all(|&e| e > 0.0) && align >= 1.0 - 1e-8;
            let m = sample_admissible(&c, Hyperbolic, 0.5, 2.0, rng)?;
            ok &= curvature_jacobian(&c, &m)?.eigenvalues.iter().all(|&e| e > 0.0);
        }
        Ok((ok, format!("min kernel alignment {worst_align:.16}")))
    });
    let extended = guarded("extended curvature at a crushed vertex", || {
        let m = PackingMetric::new(vec![1e-3, 1.0, 1.0, 1.0, 1.0], Euclidean)?;
        let k = extended_curvature(&c, &m)?;
        let err = (k.values[0] + 4.0 * PI).abs();
        Ok((err <= 1e-12, format!("error {err:.3e}")))
    });
    Suite {
        name: "curvature",
        checks: vec![regular, spectrum, extended],
    }
}

fn solver_suite(rng: &mut ChaCha8Rng, seed: u64) -> Suite {
    let c = Complex::boundary_4_simplex();
    let star = [1.0, 1.1, 0.9, 1.05, 0.95];
    let mut checks = Vec::new();
    for (name, g, alpha) in [
        ("recovery euclidean alpha 0", Euclidean, 0.0),
        ("recovery hyperbolic alpha 0", Hyperbolic, 0.0),
        ("recovery euclidean alpha -2", Euclidean, -2.0),
    ] {
        checks.push(guarded(name, || {
            let m = PackingMetric::new(star.to_vec(), g)?;
            let t = PrescribedTarget::new(spherepack::curvature::alpha_curvature(&c, &m, alpha)?.values, alpha, g)?;
            let res = solve_prescribed(&c, &t, &SolveOptions::new(vec![1.0; 5], &t))?;
            let scale = if t.has_scale_gauge() {
                let n = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
                n(&star) / n(&res.radii)
            } else {
                1.0
            };
            let err = res
                .radii
                .iter()
                .zip(&star)
                .map(|(x, y)| (scale * x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            Ok((res.converged && err <= 1e-6, format!("{:?}, error {err:.3e}", res.outcome)))
        }));
    }

    checks.push(guarded("potential midpoint convexity", || {
        let m = PackingMetric::new(star.to_vec(), Euclidean)?;
        let t = PrescribedTarget::new(scalar_curvature(&c, &m)?.values, 0.0, Euclidean)?;
        let reference = PackingMetric::uniform(5, 1.0, Euclidean);
        let mut worst = f64::NEG_INFINITY;
        for k in 0..10 {
            let mut a = sample_admissible(&c, Euclidean, 0.5, 2.0, rng)?;
            let b = sample_admissible(&c, Euclidean, 0.5, 2.0, rng)?;
            if k % 2 == 0 {
                a.radii[k % 5] = log_uniform(rng, 0.01, 0.1);
            }
            let mid = PackingMetric::new(a.radii.iter().zip(&b.radii).map(|(x, y)| 0.5 * (x + y)).collect(), Euclidean)?;
            let (fa, fb) = (potential_value(&c, &a, &t, &reference)?, potential_value(&c, &b, &t, &reference)?);
            worst = worst.max(potential_value(&c, &mid, &t, &reference)? - 0.5 * (fa + fb));
        }
        Ok((worst <= 1e-8, format!("max violation {worst:.3e}")))
    }));

    checks.push(guarded("gradient at exact solution", || {
        let m = PackingMetric::new(star.to_vec(), Hyperbolic)?;
        let t = PrescribedTarget::new(scalar_curvature(&c, &m)?.values, 0.0, Hyperbolic)?;
        let g = potential_gradient(&c, &m, &t)?;
        let worst = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Ok((worst <= 1e-12, format!("max component {worst:.3e}")))
    }));

    for (name, g, alpha) in [
        ("rigidity experiment euclidean alpha 0", Euclidean, 0.0),
        ("rigidity experiment hyperbolic alpha 0", Hyperbolic, 0.0),
        ("rigidity experiment euclidean alpha -2", Euclidean, -2.0),
    ] {
        checks.push(guarded(name, || {
            let report = rigidity_experiment(&c, g, alpha, 4, seed)?;
            Ok((
                report.passed,
                format!("{}, max pairwise distance {:.3e}", report.verdict, report.max_pairwise_distance),
            ))
        }));
    }
    Suite { name: "solver", checks }
}

pub fn table(suites: &[Suite]) -> String {
    let width = suites
        .iter()
        .flat_map(|s| s.checks.iter().map(|c| c.name.len() + s.name.len() + 2))
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for s in suites {
        for c in &s.checks {
            let label = format!("{}: {}", s.name, c.name);
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {label:<width$}  {}\n", c.detail));
        }
    }
    let passed = suites.iter().filter(|s| s.passed()).count();
    out.push_str(&format!("{passed}/{} suites passed\n", suites.len()));
    out
}
