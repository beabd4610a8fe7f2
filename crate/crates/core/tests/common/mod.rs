#![allow(dead_code)]

use nalgebra::{Matrix4, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spherepack::tetgeom::EDGES;
use spherepack::{Complex, Geometry, TetRadii};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tr(r: [f64; 4]) -> TetRadii {
    TetRadii::new(r).unwrap()
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// Uniform in `(0, hi]`.
pub fn uniform_open(rng: &mut impl Rng, hi: f64) -> f64 {
    hi * (1.0 - rng.random::<f64>())
}

/// Random tetrahedron radii with `Q > 0`, log-uniform in `[lo, hi]`.
pub fn admissible_tet(rng: &mut impl Rng, g: Geometry, lo: f64, hi: f64) -> [f64; 4] {
    loop {
        let r = [(); 4].map(|_| log_uniform(rng, lo, hi));
        if q_oracle(r, g) > 0.0 {
            return r;
        }
    }
}

pub fn q_oracle(r: [f64; 4], g: Geometry) -> f64 {
    let k = match g {
        Geometry::Euclidean => r.map(|x| 1.0 / x),
        Geometry::Hyperbolic => r.map(|x| 1.0 / x.tanh()),
    };
    let s: f64 = k.iter().sum();
    let s2: f64 = k.iter().map(|x| x * x).sum();
    let extra = if g == Geometry::Hyperbolic { 4.0 } else { 0.0 };
    s * s - 2.0 * s2 + extra
}

/// Inner tangent circle radius by the Descartes formula `k₄ = k₁+k₂+k₃ + 2√(k₁k₂+k₁k₃+k₂k₃)`.
pub fn descartes_inner(a: f64, b: f64, c: f64) -> f64 {
    let (x, y, z) = (1.0 / a, 1.0 / b, 1.0 / c);
    1.0 / (x + y + z + 2.0 * (x * y + x * z + y * z).sqrt())
}

/// Root of `Q^H(·, rj, rk, rl) = 0` by bisection; `Q^H` increases with the
/// first radius below the boundary.
pub fn hyperbolic_root_bisect(rj: f64, rk: f64, rl: f64) -> f64 {
    let q = |x: f64| q_oracle([x, rj, rk, rl], Geometry::Hyperbolic);
    let mut lo = 1e-300_f64.max(rj.min(rk).min(rl) * 1e-12);
    let mut hi = rj.min(rk).min(rl);
    assert!(q(lo) < 0.0 && q(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Euclidean vertex coordinates realizing the six edge lengths (EDGES order).
pub fn euclidean_embedding(l: [f64; 6]) -> [Vector3<f64>; 4] {
    let d = |a: usize, b: usize| {
        let i = EDGES.iter().position(|&e| e == (a.min(b), a.max(b))).unwrap();
        l[i]
    };
    let p0 = Vector3::zeros();
    let p1 = Vector3::new(d(0, 1), 0.0, 0.0);
    let x2 = (d(0, 2).powi(2) - d(1, 2).powi(2) + d(0, 1).powi(2)) / (2.0 * d(0, 1));
    let p2 = Vector3::new(x2, (d(0, 2).powi(2) - x2 * x2).sqrt(), 0.0);
    let x3 = (d(0, 3).powi(2) - d(1, 3).powi(2) + d(0, 1).powi(2)) / (2.0 * d(0, 1));
    let y3 = (d(0, 3).powi(2) - d(2, 3).powi(2) + p2.norm_squared() - 2.0 * x3 * p2.x) / (2.0 * p2.y);
    let z3 = (d(0, 3).powi(2) - x3 * x3 - y3 * y3).max(0.0).sqrt();
    [p0, p1, p2, Vector3::new(x3, y3, z3)]
}

/// Dihedral angles from coordinates, EDGES order.
pub fn euclidean_dihedrals_by_coordinates(r: [f64; 4]) -> [f64; 6] {
    let l = EDGES.map(|(a, b)| r[a] + r[b]);
    let p = euclidean_embedding(l);
    EDGES.map(|(a, b)| {
        let mut rest = (0..4).filter(|&v| v != a && v != b);
        let (c, d) = (rest.next().unwrap(), rest.next().unwrap());
        let e = (p[b] - p[a]).normalize();
        let u = p[c] - p[a];
        let w = p[d] - p[a];
        let u = u - e * e.dot(&u);
        let w = w - e * e.dot(&w);
        (u.dot(&w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos()
    })
}

/// Dihedral angles from the inverse of the vertex Gram matrix, EDGES order.
/// Hyperbolic vertices on the hyperboloid pair to `−cosh l`; Euclidean
/// lengths enter through the Gram matrix of edge vectors from vertex 0.
pub fn hyperbolic_dihedrals_by_gram(r: [f64; 4]) -> [f64; 6] {
    let mut g = Matrix4::<f64>::from_element(0.0);
    for i in 0..4 {
        g[(i, i)] = -1.0;
    }
    for (a, b) in EDGES {
        let c = -(r[a] + r[b]).cosh();
        g[(a, b)] = c;
        g[(b, a)] = c;
    }
    let inv = g.try_inverse().unwrap();
    EDGES.map(|(a, b)| {
        let mut rest = (0..4).filter(|&v| v != a && v != b);
        let (k, l) = (rest.next().unwrap(), rest.next().unwrap());
        let cos = -inv[(k, l)] / (inv[(k, k)] * inv[(l, l)]).sqrt();
        cos.clamp(-1.0, 1.0).acos()
    })
}

pub fn solid_from_dihedrals(d: [f64; 6]) -> [f64; 4] {
    std::array::from_fn(|v| {
        EDGES
            .iter()
            .zip(d)
            .filter(|((a, b), _)| *a == v || *b == v)
            .map(|(_, x)| x)
            .sum::<f64>()
            - std::f64::consts::PI
    })
}

/// Central finite-difference Jacobian of a map of four radii.
pub fn fd_jacobian(r: [f64; 4], f: impl Fn([f64; 4]) -> [f64; 4]) -> [[f64; 4]; 4] {
    let mut j = [[0.0; 4]; 4];
    for nu in 0..4 {
        let h = (1e-6 * r[nu]).max(1e-6);
        let mut p = r;
        let mut m = r;
        p[nu] += h;
        m[nu] -= h;
        let (fp, fm) = (f(p), f(m));
        for mu in 0..4 {
            j[mu][nu] = (fp[mu] - fm[mu]) / (2.0 * h);
        }
    }
    j
}

/// Boundary of the 4-dimensional cross-polytope: 8 vertices, 16 tetrahedra,
/// a closed triangulation of the 3-sphere. Vertex `2i` is `+e_i`, `2i+1` is `−e_i`.
pub fn sixteen_cell() -> Complex {
    let tets = (0..16u32)
        .map(|mask| std::array::from_fn(|i| 2 * i + ((mask >> i) & 1) as usize))
        .collect();
    Complex::new(8, tets).unwrap()
}

/// Euclidean solid angles from coordinates, by the triple-product formula
/// `tan(Ω/2) = |u·(v×w)| / (|u||v||w| + (u·v)|w| + (u·w)|v| + (v·w)|u|)`.
pub fn euclidean_solid_by_coordinates(r: [f64; 4]) -> [f64; 4] {
    let p = euclidean_embedding(EDGES.map(|(a, b)| r[a] + r[b]));
    std::array::from_fn(|v| {
        let others: Vec<_> = (0..4).filter(|&w| w != v).map(|w| p[w] - p[v]).collect();
        let (u, s, t) = (others[0], others[1], others[2]);
        let (nu, ns, nt) = (u.norm(), s.norm(), t.norm());
        let num = u.dot(&s.cross(&t)).abs();
        let den = nu * ns * nt + u.dot(&s) * nt + u.dot(&t) * ns + s.dot(&t) * nu;
        2.0 * num.atan2(den)
    })
}
