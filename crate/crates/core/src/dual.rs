//! Forward-mode dual numbers carrying the gradient with respect to the four
//! radii of one tetrahedron.
//!
//! The tetrahedron pipeline in [`crate::tetgeom`] is written once against
//! [`Real`] and instantiated with `f64` (values) or [`Dual4`] (values plus
//! exact first derivatives).

use std::ops::{Add, Div, Mul, Neg, Sub};

/// The scalar operations used by the tetrahedron pipeline.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(x: f64) -> Self;
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
    fn acos(self) -> Self;
    fn cosh(self) -> Self;
    fn sinh(self) -> Self;
    fn tanh(self) -> Self;
    /// `atan2(self, x)`.
    fn atan2(self, x: Self) -> Self;
    /// Replaces the value by `x` (used for clamping), keeping derivatives.
    fn with_value(self, x: f64) -> Self;
}

impl Real for f64 {
    fn constant(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn acos(self) -> Self {
        f64::acos(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn with_value(self, x: f64) -> Self {
        x
    }
}

/// A value together with its partial derivatives along four seed directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual4 {
    pub v: f64,
    pub d: [f64; 4],
}

impl Dual4 {
    /// The independent variable number `k` with value `v`.
    pub fn variable(v: f64, k: usize) -> Self {
        let mut d = [0.0; 4];
        d[k] = 1.0;
        Self { v, d }
    }

    fn chain(self, v: f64, slope: f64) -> Self {
        Self {
            v,
            d: self.d.map(|x| slope * x),
        }
    }
}

impl Add for Dual4 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d: std::array::from_fn(|k| self.d[k] + o.d[k]),
        }
    }
}

impl Sub for Dual4 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            v: self.v - o.v,
            d: std::array::from_fn(|k| self.d[k] - o.d[k]),
        }
    }
}

impl Mul for Dual4 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d: std::array::from_fn(|k| self.d[k] * o.v + self.v * o.d[k]),
        }
    }
}

impl Div for Dual4 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v;
        Self {
            v: q,
            d: std::array::from_fn(|k| (self.d[k] - q * o.d[k]) / o.v),
        }
    }
}

impl Neg for Dual4 {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            v: -self.v,
            d: self.d.map(|x| -x),
        }
    }
}

impl Real for Dual4 {
    fn constant(x: f64) -> Self {
        Self { v: x, d: [0.0; 4] }
    }
    fn value(self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn acos(self) -> Self {
        let slope = -1.0 / ((1.0 - self.v) * (1.0 + self.v)).sqrt();
        self.chain(self.v.acos(), slope)
    }
    fn cosh(self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh())
    }
    fn sinh(self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh())
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        self.chain(t, 1.0 - t * t)
    }
    fn atan2(self, x: Self) -> Self {
        let n = x.v * x.v + self.v * self.v;
        Self {
            v: self.v.atan2(x.v),
            d: std::array::from_fn(|k| (x.v * self.d[k] - self.v * x.d[k]) / n),
        }
    }
    fn with_value(self, x: f64) -> Self {
        Self { v: x, d: self.d }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn elementary_derivatives_match_differences() {
        let x = 0.37;
        let dx = Dual4::variable(x, 2);
        let cases: [(Dual4, fn(f64) -> f64); 5] = [
            (dx.sqrt(), f64::sqrt),
            (dx.acos(), f64::acos),
            (dx.cosh(), f64::cosh),
            (dx.sinh(), f64::sinh),
            (dx.tanh(), f64::tanh),
        ];
        for (d, f) in cases {
            assert!((d.v - f(x)).abs() < 1e-15);
            assert!((d.d[2] - fd(f, x)).abs() < 1e-8);
            assert_eq!(d.d[0], 0.0);
        }
    }

    #[test]
    fn arithmetic_rules() {
        let a = Dual4::variable(2.0, 0);
        let b = Dual4::variable(3.0, 1);
        let q = (a * b - a / b) + (-a);
        // q = ab - a/b - a
        assert!((q.v - (6.0 - 2.0 / 3.0 - 2.0)).abs() < 1e-15);
        assert!((q.d[0] - (3.0 - 1.0 / 3.0 - 1.0)).abs() < 1e-15);
        assert!((q.d[1] - (2.0 + 2.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn atan2_partials() {
        let (y, x) = (-0.4, -1.3);
        let a = Dual4::variable(y, 0).atan2(Dual4::variable(x, 1));
        assert!((a.v - y.atan2(x)).abs() < 1e-15);
        assert!((a.d[0] - fd(|t| t.atan2(x), y)).abs() < 1e-8);
        assert!((a.d[1] - fd(|t| y.atan2(t), x)).abs() < 1e-8);
    }
}
