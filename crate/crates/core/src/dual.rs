//! Forward-mode differentiation with first-order perturbation numbers.
//!
//! [`Dual<T>`] carries a value and a single directional derivative. Because it
//! is generic over any [`Scalar`], nesting (`Dual<Dual<f64>>`) gives exact
//! mixed second derivatives without a dedicated second-order type. Every
//! evaluator in the crate (metrics, embeddings, fields) is written against
//! [`Scalar`] so it can be fed perturbed coordinates.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Real-like number type accepted by every differentiable evaluator.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_f64(v: f64) -> Self;
    /// Underlying real value with every perturbation stripped.
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn powi(self, k: i32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc *= self;
        }
        if k < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    fn scale(self, c: f64) -> Self {
        self * Self::from_f64(c)
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
}

/// A value together with one first-order perturbation: `re + eps·ε`, `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Dual { re, eps: T::zero() }
    }

    pub fn variable(re: T) -> Self {
        Dual { re, eps: T::one() }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.re.recip();
        let q = self.re * inv;
        Dual::new(q, (self.eps - q * rhs.eps) * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.re.value()
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.eps / (s + s))
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }

    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }

    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.eps * self.re.cos())
    }

    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
    }
}

/// Lift `x` one perturbation level, seeding the direction `e_k`.
pub fn seed<S: Scalar>(x: &[S], k: usize) -> Vec<Dual<S>> {
    x.iter()
        .enumerate()
        .map(|(i, &xi)| if i == k { Dual::variable(xi) } else { Dual::constant(xi) })
        .collect()
}

/// Lift `x` one perturbation level with an arbitrary tangent direction.
pub fn seed_direction<S: Scalar>(x: &[S], dir: &[S]) -> Vec<Dual<S>> {
    x.iter().zip(dir).map(|(&xi, &di)| Dual::new(xi, di)).collect()
}

pub fn lift<S: Scalar>(x: &[S]) -> Vec<Dual<S>> {
    x.iter().map(|&xi| Dual::constant(xi)).collect()
}

pub fn values<S: Scalar>(x: &[Dual<S>]) -> Vec<S> {
    x.iter().map(|d| d.re).collect()
}

pub fn tangents<S: Scalar>(x: &[Dual<S>]) -> Vec<S> {
    x.iter().map(|d| d.eps).collect()
}

pub fn to_f64<S: Scalar>(x: &[S]) -> Vec<f64> {
    x.iter().map(Scalar::value).collect()
}

pub fn from_f64s<S: Scalar>(x: &[f64]) -> Vec<S> {
    x.iter().map(|&v| S::from_f64(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample<S: Scalar>(x: S) -> S {
        (x * x).sin() * x.exp() / (S::one() + x * x).sqrt() + x.ln()
    }

    #[test]
    fn first_derivative_matches_closed_form() {
        let x = 1.3_f64;
        let d = sample(Dual::variable(x));
        let num = (x * x).sin() * x.exp();
        let den = (1.0 + x * x).sqrt();
        let dnum = (2.0 * x * (x * x).cos() + (x * x).sin()) * x.exp();
        let dden = x / den;
        let expected = (dnum * den - num * dden) / (den * den) + 1.0 / x;
        assert_relative_eq!(d.re, sample(x), epsilon = 1e-15);
        assert_relative_eq!(d.eps, expected, epsilon = 1e-13);
    }

    #[test]
    fn nested_gives_second_derivative() {
        // d²/dx² of x³ e^x = (6x + 6x² + x³) e^x
        let x = 0.7_f64;
        let inner = Dual::variable(x);
        let outer = Dual::new(inner, Dual::constant(1.0));
        let y = outer.powi(3) * outer.exp();
        let expected = (6.0 * x + 6.0 * x * x + x.powi(3)) * x.exp();
        assert_relative_eq!(y.eps.eps, expected, epsilon = 1e-12);
        assert_relative_eq!(y.re.eps, y.eps.re, epsilon = 1e-14);
    }

    #[test]
    fn negative_power_and_division() {
        let x = Dual::variable(2.0_f64);
        let y = x.powi(-2);
        assert_relative_eq!(y.re, 0.25);
        assert_relative_eq!(y.eps, -0.25);
        let q = Dual::new(3.0, 1.0) / Dual::new(2.0, 0.5);
        assert_relative_eq!(q.eps, (1.0 * 2.0 - 3.0 * 0.5) / 4.0);
    }
}
