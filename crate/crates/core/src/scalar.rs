//! Scalar abstractions shared by the numerical kernels.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::Debug;

/// Real floating scalar used by the analytic kernels (gamma, Hurwitz sums).
pub trait RealScalar: Float + FloatConst + FromPrimitive + Send + Sync + Debug + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("representable constant")
    }
}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

/// Compensated (Kahan–Babuska) accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan<T> {
    sum: T,
    comp: T,
}

impl<T: Float> Kahan<T> {
    pub fn new() -> Self {
        Kahan { sum: T::zero(), comp: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex values, one `Kahan` per component.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanComplex<T> {
    re: Kahan<T>,
    im: Kahan<T>,
}

impl<T: Float> KahanComplex<T> {
    pub fn new() -> Self {
        KahanComplex { re: Kahan::new(), im: Kahan::new() }
    }

    pub fn add(&mut self, z: num_complex::Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> num_complex::Complex<T> {
        num_complex::Complex::new(self.re.value(), self.im.value())
    }
}

/// Field of evaluation for Dirichlet-series kernels: `f64` on the real line, `Complex64` off it.
pub trait EvalScalar:
    Copy
    + Send
    + Sync
    + Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::Mul<f64, Output = Self>
    + std::ops::AddAssign
{
    fn real(x: f64) -> Self;
    fn exp(self) -> Self;
    fn re(self) -> f64;
    fn modulus(self) -> f64;
    fn to_complex(self) -> num_complex::Complex64;
}

impl EvalScalar for f64 {
    fn real(x: f64) -> Self {
        x
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn re(self) -> f64 {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self, 0.0)
    }
}

impl EvalScalar for num_complex::Complex64 {
    fn real(x: f64) -> Self {
        num_complex::Complex64::new(x, 0.0)
    }
    fn exp(self) -> Self {
        num_complex::Complex64::exp(self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> num_complex::Complex64 {
        self
    }
}

/// Kahan accumulator over any `EvalScalar` (componentwise for complex values).
#[derive(Clone, Copy, Debug)]
pub struct KahanSum<T> {
    sum: T,
    comp: T,
}

impl<T: EvalScalar> KahanSum<T> {
    pub fn new() -> Self {
        KahanSum { sum: T::real(0.0), comp: T::real(0.0) }
    }

    pub fn add(&mut self, x: T) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum
    }
}

impl<T: EvalScalar> Default for KahanSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = Kahan::<f64>::new();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-18);
    }

    #[test]
    fn kahan_f32() {
        let mut k = Kahan::<f32>::new();
        for _ in 0..1000 {
            k.add(0.1);
        }
        assert!((k.value() - 100.0).abs() < 1e-4);
    }
}
