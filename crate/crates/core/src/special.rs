//! Special functions: exact Bernoulli numbers and the complex gamma function.

use crate::scalar::RealScalar;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::sync::OnceLock;

const BERNOULLI_CACHE: usize = 96;

fn bernoulli_table() -> &'static Vec<BigRational> {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // B_n with the B_1 = -1/2 convention, from sum_{k<=n} C(n+1,k) B_k = 0.
        let mut b: Vec<BigRational> = Vec::with_capacity(BERNOULLI_CACHE);
        b.push(BigRational::one());
        for n in 1..BERNOULLI_CACHE {
            let mut acc = BigRational::zero();
            let mut binom = BigInt::one();
            for (k, bk) in b.iter().enumerate() {
                acc += BigRational::from_integer(binom.clone()) * bk;
                binom = binom * BigInt::from(n + 1 - k) / BigInt::from(k + 1);
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(n + 1)));
        }
        b
    })
}

/// Exact Bernoulli number B_n (B_1 = -1/2).
pub fn bernoulli(n: usize) -> BigRational {
    if n < BERNOULLI_CACHE {
        return bernoulli_table()[n].clone();
    }
    let mut b = bernoulli_table().clone();
    for m in BERNOULLI_CACHE..=n {
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b[n].clone()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// B_{2j}/(2j)! as a float, for the Euler–Maclaurin correction terms.
pub fn em_coefficient<T: RealScalar>(j: usize) -> T {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let mut v = vec![0.0];
        let mut fact = BigInt::one();
        for n in 1..=(2 * 40) {
            fact *= BigInt::from(n);
            if n % 2 == 0 {
                let c = bernoulli(n) / BigRational::from_integer(fact.clone());
                v.push(c.to_f64().unwrap_or(0.0));
            }
        }
        v
    });
    T::lit(t[j])
}

/// sin(pi x) with exact zeros at integers.
pub fn sin_pi_real<T: RealScalar>(x: T) -> T {
    let two = T::lit(2.0);
    let r = x - two * (x / two).round();
    if r == T::zero() || r.abs() == T::one() {
        return T::zero();
    }
    if r == T::lit(0.5) {
        return T::one();
    }
    if r == T::lit(-0.5) {
        return -T::one();
    }
    (T::PI() * r).sin()
}

/// cos(pi x) with exact zeros at half-integers.
pub fn cos_pi_real<T: RealScalar>(x: T) -> T {
    sin_pi_real(x + T::lit(0.5))
}

pub fn sin_pi<T: RealScalar>(z: Complex<T>) -> Complex<T> {
    let py = T::PI() * z.im;
    Complex::new(sin_pi_real(z.re) * py.cosh(), cos_pi_real(z.re) * py.sinh())
}

pub fn cos_pi<T: RealScalar>(z: Complex<T>) -> Complex<T> {
    let py = T::PI() * z.im;
    Complex::new(cos_pi_real(z.re) * py.cosh(), -sin_pi_real(z.re) * py.sinh())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn gamma_right<T: RealScalar>(z: Complex<T>) -> Complex<T> {
    // Lanczos for Re z >= 1/2.
    let zm = z - T::one();
    let mut a = Complex::new(T::lit(LANCZOS[0]), T::zero());
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + Complex::new(T::lit(c), T::zero()) / (zm + T::from_usize(i).unwrap());
    }
    let t = zm + T::lit(LANCZOS_G + 0.5);
    let sqrt_2pi = (T::lit(2.0) * T::PI()).sqrt();
    (t.ln() * (zm + T::lit(0.5)) - t).exp() * a * sqrt_2pi
}

/// True when z is a pole of Gamma (a non-positive integer).
pub fn is_gamma_pole<T: RealScalar>(z: Complex<T>) -> bool {
    z.im == T::zero() && z.re <= T::zero() && z.re == z.re.round()
}

/// Complex gamma function; infinite at poles.
pub fn gamma<T: RealScalar>(z: Complex<T>) -> Complex<T> {
    if is_gamma_pole(z) {
        return Complex::new(T::infinity(), T::zero());
    }
    if z.re < T::lit(0.5) {
        let s = sin_pi(z);
        Complex::new(T::PI(), T::zero()) / (s * gamma_right(Complex::new(T::one(), T::zero()) - z))
    } else {
        gamma_right(z)
    }
}

/// Reciprocal gamma, an entire function (exactly zero at the poles of Gamma).
pub fn rgamma<T: RealScalar>(z: Complex<T>) -> Complex<T> {
    if is_gamma_pole(z) {
        return Complex::new(T::zero(), T::zero());
    }
    if z.re < T::lit(0.5) {
        gamma_right(Complex::new(T::one(), T::zero()) - z) * sin_pi(z) / T::PI()
    } else {
        Complex::new(T::one(), T::zero()) / gamma_right(z)
    }
}

/// Real-argument convenience wrapper.
pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex::new(x, 0.0)).re
}

/// Upper bound for ζ(σ), σ > 1: Σ_{n ≤ 256} n^{-σ} + 256^{1-σ}/(σ - 1).
pub fn zeta_upper(sigma: f64) -> f64 {
    assert!(sigma > 1.0, "zeta_upper needs sigma > 1");
    const N: u32 = 256;
    let head: f64 = (1..=N).map(|n| (n as f64).powf(-sigma)).sum();
    (head + (N as f64).powf(1.0 - sigma) / (sigma - 1.0)) * (1.0 + 1e-13)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0), BigRational::one());
        assert_eq!(bernoulli(1), BigRational::new((-1).into(), 2.into()));
        assert_eq!(bernoulli(2), BigRational::new(1.into(), 6.into()));
        assert_eq!(bernoulli(3), BigRational::zero());
        assert_eq!(bernoulli(4), BigRational::new((-1).into(), 30.into()));
        assert_eq!(bernoulli(12), BigRational::new((-691).into(), 2730.into()));
    }

    #[test]
    fn gamma_known_values() {
        let g = gamma(Complex64::new(5.0, 0.0));
        assert!((g.re - 24.0).abs() < 1e-12);
        let h = gamma(Complex64::new(0.5, 0.0));
        assert!((h.re - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        let n = gamma(Complex64::new(-0.5, 0.0));
        assert!((n.re + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
        // |Gamma(i)|^2 = pi / sinh(pi)
        let gi = gamma(Complex64::new(0.0, 1.0));
        let pi = std::f64::consts::PI;
        assert!((gi.norm_sqr() - pi / pi.sinh()).abs() < 1e-14);
    }

    #[test]
    fn rgamma_zero_at_poles() {
        for k in 0..5 {
            assert_eq!(rgamma(Complex64::new(-(k as f64), 0.0)), Complex64::new(0.0, 0.0));
        }
        let z = Complex64::new(2.3, -0.7);
        assert!((rgamma(z) * gamma(z) - 1.0).norm() < 1e-13);
    }

    #[test]
    fn gamma_f32() {
        let g = gamma(Complex::<f32>::new(4.0, 0.0));
        assert!((g.re - 6.0).abs() < 1e-4);
    }

    #[test]
    fn reflection_formula() {
        let z = Complex64::new(0.3, 0.4);
        let lhs = gamma(z) * gamma(Complex64::new(1.0, 0.0) - z);
        let rhs = Complex64::new(std::f64::consts::PI, 0.0) / sin_pi(z);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
