//! Sparse multivariate polynomials, bivariate rational functions in t1 = p^{-s1}, t2 = p^{-s2},
//! and truncated bivariate power series.

use crate::error::{invalid, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficient ring for `Poly`.
pub trait Coeff:
    Clone + Debug + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Coeff for T where
    T: Clone + Debug + PartialEq + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T, const N: usize> {
    terms: BTreeMap<[u32; N], T>,
}

pub type Poly2 = Poly<BigRational, 2>;
pub type Poly3 = Poly<BigRational, 3>;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl<T: Coeff, const N: usize> Poly<T, N> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial([0; N], c)
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn monomial(exp: [u32; N], c: T) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Poly { terms }
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; N];
        e[i] = 1;
        Self::monomial(e, T::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[u32; N]) -> T {
        self.terms.get(exp).cloned().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; N], &T)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    fn add_term(&mut self, exp: [u32; N], c: T) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(T::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, v.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// ∂/∂x_i.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = *e;
            ne[i] -= 1;
            let mut c = T::zero();
            for _ in 0..e[i] {
                c = c + v.clone();
            }
            out.add_term(ne, c);
        }
        out
    }

    /// Drops every term of total degree ≥ `k`.
    pub fn truncate(&self, k: u32) -> Self {
        Poly { terms: self.terms.iter().filter(|(e, _)| e.iter().sum::<u32>() < k).map(|(e, v)| (*e, v.clone())).collect() }
    }

    /// Substitutes x_i ↦ c·x_i.
    pub fn scale_var(&self, i: usize, c: &T) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            let mut f = v.clone();
            for _ in 0..e[i] {
                f = f * c.clone();
            }
            out.add_term(*e, f);
        }
        out
    }
}

impl<const N: usize> Poly<BigRational, N> {
    pub fn eval(&self, x: &[Complex64; N]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, v) in &self.terms {
            let mut m = Complex64::new(v.to_f64().unwrap_or(f64::NAN), 0.0);
            for (xi, &k) in x.iter().zip(e.iter()) {
                m *= xi.powu(k);
            }
            acc += m;
        }
        acc
    }

    pub fn eval_exact(&self, x: &[BigRational; N]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, v) in &self.terms {
            let mut m = v.clone();
            for (xi, &k) in x.iter().zip(e.iter()) {
                for _ in 0..k {
                    m *= xi;
                }
            }
            acc += m;
        }
        acc
    }

    /// Exact quotient self/d, or None when d does not divide self.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (dl, dv) = d.terms.iter().next_back()?;
        let mut r = self.clone();
        let mut q = Self::zero();
        while let Some((rl, rv)) = r.terms.iter().next_back() {
            if rl.iter().zip(dl.iter()).any(|(a, b)| a < b) {
                return None;
            }
            let mut e = [0u32; N];
            for i in 0..N {
                e[i] = rl[i] - dl[i];
            }
            let m = Self::monomial(e, rv / dv);
            r = &r - &(&m * d);
            q = &q + &m;
        }
        Some(q)
    }

    /// Ordered coefficient list `[[exponents...], "p/q"]`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(e, v)| serde_json::json!([e.to_vec(), v.to_string()]))
                .collect(),
        )
    }
}

impl<'a, T: Coeff, const N: usize> Add for &'a Poly<T, N> {
    type Output = Poly<T, N>;
    fn add(self, rhs: Self) -> Poly<T, N> {
        let mut out = self.clone();
        for (e, v) in &rhs.terms {
            out.add_term(*e, v.clone());
        }
        out
    }
}

impl<'a, T: Coeff, const N: usize> Sub for &'a Poly<T, N> {
    type Output = Poly<T, N>;
    fn sub(self, rhs: Self) -> Poly<T, N> {
        let mut out = self.clone();
        for (e, v) in &rhs.terms {
            out.add_term(*e, -v.clone());
        }
        out
    }
}

impl<'a, T: Coeff, const N: usize> Mul for &'a Poly<T, N> {
    type Output = Poly<T, N>;
    fn mul(self, rhs: Self) -> Poly<T, N> {
        let mut out = Poly::zero();
        for (e1, v1) in &self.terms {
            for (e2, v2) in &rhs.terms {
                let mut e = *e1;
                for i in 0..N {
                    e[i] += e2[i];
                }
                out.add_term(e, v1.clone() * v2.clone());
            }
        }
        out
    }
}

impl<'a, T: Coeff, const N: usize> Neg for &'a Poly<T, N> {
    type Output = Poly<T, N>;
    fn neg(self) -> Poly<T, N> {
        self.scale(&-T::one())
    }
}

/// `num/den` in t1 = p^{-s1}, t2 = p^{-s2}.
#[derive(Clone, Debug)]
pub struct RationalFunction2 {
    pub num: Poly2,
    pub den: Poly2,
    pub base_prime: u64,
}

impl RationalFunction2 {
    pub fn new(num: Poly2, den: Poly2, base_prime: u64) -> Result<Self> {
        if den.is_zero() {
            return invalid("zero denominator");
        }
        Ok(RationalFunction2 { num, den, base_prime }.normalized())
    }

    /// Cancels each candidate factor from numerator and denominator as often as it divides both.
    pub fn cancel(mut self, factors: &[Poly2]) -> Self {
        for f in factors {
            if f.total_degree().unwrap_or(0) == 0 {
                continue;
            }
            while let (Some(n), Some(d)) = (self.num.div_exact(f), self.den.div_exact(f)) {
                self.num = n;
                self.den = d;
            }
        }
        self.normalized()
    }

    pub fn from_poly(num: Poly2, base_prime: u64) -> Self {
        RationalFunction2 { num, den: Poly2::one(), base_prime }
    }

    /// Scales so the lowest denominator term has coefficient 1.
    fn normalized(self) -> Self {
        let lead = self.den.terms().next().map(|(_, v)| v.clone()).expect("nonzero denominator");
        if lead.is_one() {
            return self;
        }
        let inv = lead.recip();
        RationalFunction2 { num: self.num.scale(&inv), den: self.den.scale(&inv), base_prime: self.base_prime }
    }

    pub fn mul(&self, other: &Self) -> Self {
        RationalFunction2 { num: &self.num * &other.num, den: &self.den * &other.den, base_prime: self.base_prime }.normalized()
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = &(&self.num * &other.den) + &(&other.num * &self.den);
        RationalFunction2 { num, den: &self.den * &other.den, base_prime: self.base_prime }.normalized()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RationalFunction2 { num: self.num.scale(c), den: self.den.clone(), base_prime: self.base_prime }
    }

    /// Exact equality by cross-multiplication.
    pub fn equals(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }

    /// Value at (s1, s2), i.e. at t_i = p^{-s_i}.
    pub fn eval(&self, s1: Complex64, s2: Complex64) -> Complex64 {
        let p = Complex64::new(self.base_prime as f64, 0.0);
        let t = [p.powc(-s1), p.powc(-s2)];
        self.num.eval(&t) / self.den.eval(&t)
    }

    pub fn eval_t(&self, t1: Complex64, t2: Complex64) -> Complex64 {
        self.num.eval(&[t1, t2]) / self.den.eval(&[t1, t2])
    }

    /// Taylor expansion at t = 0 through total degree < k.
    pub fn series(&self, k: u32) -> Result<PowerSeries2> {
        let d0 = self.den.coeff(&[0, 0]);
        if d0.is_zero() {
            return invalid("denominator vanishes at t = 0; no Taylor expansion");
        }
        let inv = d0.recip();
        let mut c: BTreeMap<[u32; 2], BigRational> = BTreeMap::new();
        for deg in 0..k {
            for a in 0..=deg {
                let e = [a, deg - a];
                let mut v = self.num.coeff(&e);
                for (de, dv) in self.den.terms() {
                    if *de == [0, 0] || de[0] > e[0] || de[1] > e[1] {
                        continue;
                    }
                    if let Some(prev) = c.get(&[e[0] - de[0], e[1] - de[1]]) {
                        v -= dv * prev;
                    }
                }
                let v = v * &inv;
                if !v.is_zero() {
                    c.insert(e, v);
                }
            }
        }
        Ok(PowerSeries2 { k, coeffs: Poly { terms: c } })
    }
}

/// Bivariate series known exactly on all monomials of total degree < k.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries2 {
    pub k: u32,
    pub coeffs: Poly2,
}

impl PowerSeries2 {
    pub fn from_poly(k: u32, p: Poly2) -> Self {
        PowerSeries2 { k, coeffs: p.truncate(k) }
    }

    pub fn coeff(&self, a: u32, b: u32) -> BigRational {
        self.coeffs.coeff(&[a, b])
    }

    /// Monomials (a, b) with a + b < min(k, other.k) on which the two series differ.
    pub fn mismatches(&self, other: &PowerSeries2) -> Vec<(u32, u32)> {
        let k = self.k.min(other.k);
        let mut out = Vec::new();
        for deg in 0..k {
            for a in 0..=deg {
                if self.coeff(a, deg - a) != other.coeff(a, deg - a) {
                    out.push((a, deg - a));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1() -> Poly2 {
        Poly2::var(0)
    }
    fn t2() -> Poly2 {
        Poly2::var(1)
    }

    #[test]
    fn arithmetic() {
        let a = &Poly2::one() + &t1();
        let b = &Poly2::one() - &t1();
        let prod = &a * &b;
        assert_eq!(prod, &Poly2::one() - &t1().pow(2));
        assert_eq!(prod.total_degree(), Some(2));
        assert!((&prod - &prod).is_zero());
        let d = (&t1().pow(3) * &t2()).derivative(0);
        assert_eq!(d, (&t1().pow(2) * &t2()).scale(&int(3)));
    }

    #[test]
    fn geometric_series() {
        let f = RationalFunction2::new(Poly2::one(), &Poly2::one() - &t1(), 3).unwrap();
        let s = f.series(5).unwrap();
        for a in 0..5 {
            assert_eq!(s.coeff(a, 0), int(1));
        }
        assert_eq!(s.coeff(1, 1), int(0));
        let g = RationalFunction2::new(&Poly2::one() + &t1(), &Poly2::one() - &t1().pow(2).scale(&int(3)), 3).unwrap();
        let gs = g.series(7).unwrap();
        let expect = [1, 1, 3, 3, 9, 9, 27];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(gs.coeff(k as u32, 0), int(*e));
        }
    }

    #[test]
    fn cross_multiplied_equality() {
        let a = RationalFunction2::new(&Poly2::one() - &t2(), &Poly2::one() - &t2().pow(2), 2).unwrap();
        let b = RationalFunction2::new(Poly2::one(), &Poly2::one() + &t2(), 2).unwrap();
        assert!(a.equals(&b));
        let v = a.eval(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        assert!((v - Complex64::new(2.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exact_division_and_cancel() {
        let t1 = Poly2::var(0);
        let t2 = Poly2::var(1);
        let a = &Poly2::one() - &t1;
        let b = &Poly2::one() + &(&t1 * &t2).scale(&int(3));
        let ab = &a * &b;
        assert_eq!(ab.div_exact(&a), Some(b.clone()));
        assert_eq!(ab.div_exact(&b), Some(a.clone()));
        assert_eq!(b.div_exact(&a), None);
        let f = RationalFunction2::new(&ab * &a, &a * &t2, 3).unwrap().cancel(&[a.clone()]);
        assert_eq!(f.num, ab);
        assert_eq!(f.den, t2);
    }

    #[test]
    fn json_is_ordered() {
        let p = &t1() + &t2().scale(&rat(1, 2));
        assert_eq!(p.to_json().to_string(), r#"[[[0,1],"1/2"],[[1,0],"1"]]"#);
    }

    #[test]
    fn generic_over_integers() {
        let x = Poly::<i64, 1>::var(0);
        let p = (&x + &Poly::one()).pow(3);
        assert_eq!(p.coeff(&[2]), 3);
    }
}
