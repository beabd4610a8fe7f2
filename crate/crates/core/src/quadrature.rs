//! Globally adaptive composite Gauss–Legendre quadrature on `[0, 1]`.
//!
//! Panels are bisected in order of decreasing local error estimate (the
//! difference between a panel rule and the sum over its two halves) until
//! the total estimate is below `rel_tol · ∫|f|`. Integrands here are
//! continuous but may have square-root kinks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::PackingError;

const ORDER: usize = 10;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
fn gauss_legendre() -> ([f64; ORDER], [f64; ORDER]) {
    let n = ORDER;
    let mut x = [0.0; ORDER];
    let mut w = [0.0; ORDER];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    /// Absolute error accepted regardless of `rel_tol`, for integrands whose
    /// evaluation noise exceeds `rel_tol · ∫|f|`.
    pub abs_tol: f64,
    pub max_panels: usize,
    pub initial_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_panels: 20_000,
            initial_panels: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Ties broken by position so that refinement order is reproducible.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

struct Integrator<'a, F> {
    f: F,
    nodes: &'a ([f64; ORDER], [f64; ORDER]),
}

impl<F: FnMut(f64) -> Result<f64, PackingError>> Integrator<'_, F> {
    fn rule(&mut self, a: f64, b: f64) -> Result<(f64, f64), PackingError> {
        let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
        let (mut sum, mut abs) = (0.0, 0.0);
        for (x, w) in self.nodes.0.iter().zip(&self.nodes.1) {
            let y = (self.f)(mid + half * x)?;
            if !y.is_finite() {
                return Err(PackingError::Numeric(format!(
                    "non-finite integrand at t = {}",
                    mid + half * x
                )));
            }
            sum += w * y;
            abs += w * y.abs();
        }
        Ok((half * sum, half * abs))
    }

    fn panel(&mut self, a: f64, b: f64) -> Result<Panel, PackingError> {
        let m = 0.5 * (a + b);
        let (whole, _) = self.rule(a, b)?;
        let (left, la) = self.rule(a, m)?;
        let (right, ra) = self.rule(m, b)?;
        Ok(Panel {
            a,
            b,
            value: left + right,
            abs_value: la + ra,
            error: (whole - (left + right)).abs(),
        })
    }
}

/// Integrates `f` over `[0, 1]`.
pub fn integrate_unit<F>(f: F, opts: &QuadratureOptions) -> Result<QuadratureResult, PackingError>
where
    F: FnMut(f64) -> Result<f64, PackingError>,
{
    integrate_unit_with_breaks(f, &[], opts)
}

/// As [`integrate_unit`], with panel endpoints forced at `breaks`. Known
/// kinks should be passed here: the panel error estimate is unreliable for
/// a kink strictly inside a panel.
pub fn integrate_unit_with_breaks<F>(
    f: F,
    breaks: &[f64],
    opts: &QuadratureOptions,
) -> Result<QuadratureResult, PackingError>
where
    F: FnMut(f64) -> Result<f64, PackingError>,
{
    let nodes = gauss_legendre();
    let mut integ = Integrator { f, nodes: &nodes };
    let mut heap = BinaryHeap::new();
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| *b > 0.0 && *b < 1.0).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let n0 = opts.initial_panels.max(1);
    for w in cuts.windows(2) {
        for i in 0..n0 {
            let a = w[0] + (w[1] - w[0]) * i as f64 / n0 as f64;
            let b = if i + 1 == n0 { w[1] } else { w[0] + (w[1] - w[0]) * (i + 1) as f64 / n0 as f64 };
            heap.push(integ.panel(a, b)?);
        }
    }
    loop {
        let (value, abs_value, error) = heap.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.value, acc.1 + p.abs_value, acc.2 + p.error)
        });
        if error <= (opts.rel_tol * abs_value).max(opts.abs_tol) || error == 0.0 {
            // Sum in position order for a reproducible result.
            let mut panels: Vec<_> = heap.into_vec();
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value = panels.iter().map(|p| p.value).sum();
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                panels: panels.len(),
            });
        }
        if heap.len() >= opts.max_panels {
            return Err(PackingError::Numeric(format!(
                "quadrature did not converge: {} panels, estimate {value}, error {error}",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            return Err(PackingError::Numeric(format!(
                "quadrature panel at t = {} cannot be bisected further",
                worst.a
            )));
        }
        heap.push(integ.panel(worst.a, m)?);
        heap.push(integ.panel(m, worst.b)?);
    }
}
