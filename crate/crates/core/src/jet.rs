//! Second-order forward-mode differentiation.
//!
//! Every evaluator in this crate is generic over [`Scalar`], so the same
//! recurrence that produces a value on `f64` produces value, gradient and
//! Hessian when fed [`Jet`] inputs. Composition (for example a polynomial
//! pulled back through a chart map) is then just evaluation on jets.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + Mul<f64, Output = Self>
    + Send
    + Sync
{
    fn constant(c: f64) -> Self;
    fn value(&self) -> f64;
    fn recip(self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn constant(c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
}

/// Value, gradient and Hessian with respect to `N` independent variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(c: f64) -> Self {
        Jet {
            v: c,
            g: [0.0; N],
            h: [[0.0; N]; N],
        }
    }

    /// The coordinate function `x_i` evaluated at `value`.
    pub fn variable(i: usize, value: f64) -> Self {
        let mut j = Self::constant(value);
        j.g[i] = 1.0;
        j
    }

    /// Seeds all `N` coordinates at the point `x`.
    pub fn seed(x: &[f64; N]) -> [Self; N] {
        std::array::from_fn(|i| Self::variable(i, x[i]))
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        let d1 = -inv * inv;
        let d2 = 2.0 * inv * inv * inv;
        self.chain(inv, d1, d2)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let d1 = 0.5 / s;
        let d2 = -0.25 / (s * self.v);
        self.chain(s, d1, d2)
    }

    /// Applies a scalar function with value `f0`, first derivative `f1`
    /// and second derivative `f2` at `self.v`.
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..N {
            out.g[i] = f1 * self.g[i];
            for j in 0..N {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Scalar for Jet<N> {
    #[inline]
    fn constant(c: f64) -> Self {
        Jet::constant(c)
    }
    #[inline]
    fn value(&self) -> f64 {
        self.v
    }
    #[inline]
    fn recip(self) -> Self {
        Jet::recip(self)
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const N: usize> AddAssign for Jet<N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.v += rhs.v;
        for i in 0..N {
            self.g[i] += rhs.g[i];
            for j in 0..N {
                self.h[i][j] += rhs.h[i][j];
            }
        }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, c: f64) -> Self {
        self.v *= c;
        for i in 0..N {
            self.g[i] *= c;
            for j in 0..N {
                self.h[i][j] *= c;
            }
        }
        self
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.v * rhs.v);
        for i in 0..N {
            out.g[i] = self.g[i] * rhs.v + self.v * rhs.g[i];
            for j in 0..N {
                out.h[i][j] = self.h[i][j] * rhs.v
                    + self.v * rhs.h[i][j]
                    + self.g[i] * rhs.g[j]
                    + rhs.g[i] * self.g[j];
            }
        }
        out
    }
}

/// Integer power by repeated squaring; works for any [`Scalar`].
pub fn powi<T: Scalar>(base: T, mut exp: u32) -> T {
    let mut acc = T::constant(1.0);
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b;
        }
        b = b * b;
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_matches_hand_derivatives() {
        // f(x, y) = x^2 y + 3y
        let [x, y] = Jet::<2>::seed(&[1.5, -2.0]);
        let f = x * x * y + y * 3.0;
        assert_eq!(f.v, 1.5 * 1.5 * -2.0 - 6.0);
        assert_eq!(f.g, [2.0 * 1.5 * -2.0, 1.5 * 1.5 + 3.0]);
        assert_eq!(f.h, [[2.0 * -2.0, 2.0 * 1.5], [2.0 * 1.5, 0.0]]);
    }

    #[test]
    fn recip_and_sqrt_chain_rule() {
        let [x] = Jet::<1>::seed(&[4.0]);
        let r = x.recip();
        assert!((r.g[0] + 1.0 / 16.0).abs() < 1e-15);
        assert!((r.h[0][0] - 2.0 / 64.0).abs() < 1e-15);
        let s = x.sqrt();
        assert!((s.v - 2.0).abs() < 1e-15);
        assert!((s.g[0] - 0.25).abs() < 1e-15);
        assert!((s.h[0][0] + 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let [x] = Jet::<1>::seed(&[1.1]);
        let p = powi(x, 5);
        assert!((p.v - 1.1f64.powi(5)).abs() < 1e-12);
        assert!((p.g[0] - 5.0 * 1.1f64.powi(4)).abs() < 1e-12);
        assert!((p.h[0][0] - 20.0 * 1.1f64.powi(3)).abs() < 1e-12);
    }
}
