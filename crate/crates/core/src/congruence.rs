//! Root counts of x² ≡ n (mod m) and the truncated Shintani double Dirichlet series.

use crate::arith::{factorize, kronecker_pos, valuation};
use crate::error::{Error, Result};
use crate::lfun::ComplexPair;
use crate::scalar::KahanSum;
use crate::special::zeta_upper;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A(m, n) = #{x mod m : x² ≡ n (mod m)}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootCountQuery {
    pub m: u64,
    pub n: i64,
}

impl RootCountQuery {
    pub fn count(&self) -> u64 {
        count_roots(self.m, self.n)
    }
}

/// Roots of x² ≡ n mod p^e.
fn count_prime_power(p: u64, e: u32, n: i64) -> u64 {
    let pe = p.pow(e) as i64;
    let r = n.rem_euclid(pe);
    if r == 0 {
        return p.pow(e / 2);
    }
    let v = valuation(r as i128, p);
    if v % 2 == 1 {
        return 0;
    }
    let u = r / (p.pow(v) as i64);
    let k = e - v;
    let base = if p == 2 {
        match k {
            1 => 1,
            2 if u % 4 == 1 => 2,
            _ if k >= 3 && u % 8 == 1 => 4,
            _ => 0,
        }
    } else {
        (1 + kronecker_pos(u, p) as i64) as u64
    };
    base * p.pow(v / 2)
}

pub fn count_roots(m: u64, n: i64) -> u64 {
    assert!(m >= 1, "modulus must be positive");
    factorize(m).factors.iter().map(|&(p, e)| count_prime_power(p, e, n)).product()
}

/// Exhaustive count, the reference for `count_roots`.
pub fn count_roots_brute(m: u64, n: i64) -> u64 {
    let r = n.rem_euclid(m as i64) as u64;
    (0..m).filter(|&x| (x as u128 * x as u128 % m as u128) as u64 == r).count() as u64
}

/// A(q, r) for r = 0..q.
fn root_table(q: u64) -> Vec<u32> {
    let fac = factorize(q);
    let mut table = vec![1u32; q as usize];
    for &(p, e) in &fac.factors {
        let pe = p.pow(e);
        let local: Vec<u32> = (0..pe).map(|r| count_prime_power(p, e, r as i64) as u32).collect();
        for (r, t) in table.iter_mut().enumerate() {
            *t *= local[r % pe as usize];
        }
    }
    table
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum XiVariant {
    Xi1,
    Xi2,
    Xi1Star,
    Xi2Star,
}

impl XiVariant {
    fn sign(self) -> i64 {
        match self {
            XiVariant::Xi1 | XiVariant::Xi1Star => 1,
            XiVariant::Xi2 | XiVariant::Xi2Star => -1,
        }
    }

    fn is_star(self) -> bool {
        matches!(self, XiVariant::Xi1Star | XiVariant::Xi2Star)
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "xi1" => Ok(XiVariant::Xi1),
            "xi2" => Ok(XiVariant::Xi2),
            "xi1*" | "xi1star" => Ok(XiVariant::Xi1Star),
            "xi2*" | "xi2star" => Ok(XiVariant::Xi2Star),
            _ => Err(Error::InvalidInput(format!("unknown series {text:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTruncation {
    pub m_cut: u64,
    pub n_cut: u64,
    pub tail_bound: f64,
}

impl SeriesTruncation {
    pub fn new(m_cut: u64, n_cut: u64) -> Self {
        SeriesTruncation { m_cut, n_cut, tail_bound: f64::INFINITY }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectValue {
    pub value: Complex64,
    pub truncation: SeriesTruncation,
}

/// Σ_{k > x} k^{-σ}.
fn power_tail(x: u64, sigma: f64) -> f64 {
    if x == 0 {
        1.0 + 1.0 / (sigma - 1.0)
    } else {
        (x as f64).powf(1.0 - sigma) / (sigma - 1.0)
    }
}

/// Σ_{m > x} d(m) m^{-σ} from Σ_{m ≤ y} d(m) ≤ y (ln y + 1) and partial summation.
fn divisor_tail(x: u64, sigma: f64) -> f64 {
    let x = (x as f64).max(1.0);
    let a = sigma - 1.0;
    sigma * x.powf(-a) * ((x.ln() + 1.0) / a + 1.0 / (a * a))
}

/// Σ_{d | q} d^{1/2-σ} Σ_{k > N/d} k^{-σ}, bounding Σ_{n > N} sqrt(gcd(q, n)) n^{-σ}.
fn gcd_weighted_tail(q: u64, n_cut: u64, sigma: f64) -> f64 {
    let mut divs = vec![1u64];
    for &(p, e) in &factorize(q).factors {
        let mut next = Vec::new();
        for &d in &divs {
            let mut pk = 1;
            for _ in 0..=e {
                next.push(d * pk);
                pk *= p;
            }
        }
        divs = next;
    }
    divs.iter().map(|&d| (d as f64).powf(0.5 - sigma) * power_tail(n_cut / d, sigma)).sum()
}

/// Σ_{m > M} m^{-σ1} Σ_n A(q, n) n^{-σ2}, bounded by summing m up to 32 M with the
/// first 64 n exact per m, and the crude divisor bound beyond.
fn m_tail_bound(star: bool, sign: i64, m_cut: u64, sig1: f64, sig2: f64) -> f64 {
    const HEAD: u64 = 64;
    let m_far = m_cut + (31 * m_cut).min(1 << 20);
    let weights: Vec<f64> = (1..=HEAD).map(|n| (n as f64).powf(-sig2)).collect();
    let terms: Vec<f64> = ((m_cut + 1)..=m_far)
        .into_par_iter()
        .map(|m| {
            let q = if star { m } else { 4 * m };
            let fac = factorize(q);
            let head: f64 = weights
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let n = sign * (i as i64 + 1);
                    fac.factors.iter().map(|&(p, e)| count_prime_power(p, e, n)).product::<u64>() as f64 * w
                })
                .sum();
            let omega = fac.factors.len() as i32;
            let rest = 2f64.powi(omega + 1) * gcd_weighted_tail(q, HEAD, sig2);
            (m as f64).powf(-sig1) * (head + rest)
        })
        .collect();
    let near: f64 = terms.iter().sum();
    let zeta_bound = zeta_upper(sig2) * zeta_upper(sig2 - 0.5);
    // 2^{ω(4m)} ≤ 2 d(m)
    let omega_factor = if star { 2.0 } else { 4.0 };
    near * (1.0 + 1e-12) + omega_factor * zeta_bound * divisor_tail(m_far, sig1)
}

/// Truncated ξ_i or ξ_i* with a certified bound on the omitted terms.
///
/// The n-tail uses A(q, n) ≤ 2^{ω(q)+1} sqrt(gcd(q, n)) per m; the m-tail is
/// `m_tail_bound`.
pub fn xi_direct(variant: XiVariant, s: ComplexPair, m_cut: u64, n_cut: u64) -> Result<DirectValue> {
    let (sig1, sig2) = (s.s1.re, s.s2.re);
    if !(sig1 > 1.5 && sig2 > 1.5) {
        return Err(Error::Convergence(format!("direct series needs Re(s1), Re(s2) > 3/2, got ({sig1}, {sig2})")));
    }
    if m_cut == 0 || n_cut == 0 {
        return Err(Error::InvalidInput("cuts must be positive".into()));
    }
    let star = variant.is_star();
    let sign = variant.sign();
    let ns: Vec<Complex64> = (1..=n_cut).map(|n| Complex64::new(n as f64, 0.0).powc(-s.s2)).collect();
    let scale = if star { Complex64::new(4.0, 0.0).powc(-s.s2) } else { Complex64::new(1.0, 0.0) };

    const BLOCK: u64 = 64;
    let blocks: Vec<(Complex64, f64, f64)> = (0..m_cut.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = KahanSum::<Complex64>::new();
            let mut abs = 0.0;
            let mut tail = 0.0;
            for m in (b * BLOCK + 1)..=((b + 1) * BLOCK).min(m_cut) {
                let q = if star { m } else { 4 * m };
                let table = root_table(q);
                let mut inner = KahanSum::<Complex64>::new();
                let mut inner_abs = 0.0;
                for (i, w) in ns.iter().enumerate() {
                    let n = (i + 1) as i64;
                    let a = table[(sign * n).rem_euclid(q as i64) as usize];
                    if a != 0 {
                        let t = *w * a as f64;
                        inner.add(t);
                        inner_abs += t.norm();
                    }
                }
                let mw = Complex64::new(m as f64, 0.0).powc(-s.s1);
                acc.add(inner.value() * mw);
                abs += inner_abs * mw.norm();
                let omega = factorize(q).factors.len() as i32;
                tail += 2f64.powi(omega + 1) * (m as f64).powf(-sig1) * gcd_weighted_tail(q, n_cut, sig2);
            }
            (acc.value(), abs, tail)
        })
        .collect();
    let mut total = KahanSum::<Complex64>::new();
    let mut abs = 0.0;
    let mut n_tail = 0.0;
    for (v, a, t) in blocks {
        total.add(v);
        abs += a;
        n_tail += t;
    }
    let m_tail = m_tail_bound(star, sign, m_cut, sig1, sig2);
    let rounding = abs * 1e-15;
    let tail_bound = (m_tail + n_tail) * scale.norm() + rounding;
    Ok(DirectValue { value: total.value() * scale, truncation: SeriesTruncation { m_cut, n_cut, tail_bound } })
}

/// ξ^S(s, δ) at S = {∞}: 2^{2 s2 - 1} ξ_1*(s) for δ > 0 and 2^{2 s2 - 1} ξ_2*(s) for δ < 0.
pub fn xi_s_infty(delta: i8, s: ComplexPair, m_cut: u64, n_cut: u64) -> Result<DirectValue> {
    let variant = match delta {
        1 => XiVariant::Xi1Star,
        -1 => XiVariant::Xi2Star,
        _ => return Err(Error::InvalidInput("δ must be ±1".into())),
    };
    let d = xi_direct(variant, s, m_cut, n_cut)?;
    let f = Complex64::new(2.0, 0.0).powc(s.s2 * 2.0 - 1.0);
    Ok(DirectValue {
        value: d.value * f,
        truncation: SeriesTruncation { tail_bound: d.truncation.tail_bound * f.norm(), ..d.truncation },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(count_roots(1, 5), 1);
        assert_eq!(count_roots(4, 1), 2);
        assert_eq!(count_roots(9, 0), 3);
        assert_eq!(RootCountQuery { m: 8, n: 1 }.count(), 4);
    }

    #[test]
    fn fast_path_matches_brute_force() {
        for m in 1..=300u64 {
            for n in -300..=300i64 {
                assert_eq!(count_roots(m, n), count_roots_brute(m, n), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn multiplicative() {
        for m1 in 1..=100u64 {
            for m2 in 1..=100u64 {
                if num_integer::Integer::gcd(&m1, &m2) != 1 {
                    continue;
                }
                for n in [-7i64, 0, 1, 12, 45] {
                    assert_eq!(count_roots(m1 * m2, n), count_roots(m1, n) * count_roots(m2, n));
                }
            }
        }
    }

    #[test]
    fn odd_prime_legendre() {
        for p in [3u64, 5, 7, 11, 13, 97] {
            for n in 1..200i64 {
                if n % p as i64 != 0 {
                    assert_eq!(count_roots(p, n), (1 + kronecker_pos(n, p) as i64) as u64);
                }
            }
        }
    }

    #[test]
    fn series_examples() {
        let s = ComplexPair::real(2.0, 2.0);
        assert_eq!(xi_direct(XiVariant::Xi1, s, 1, 1).unwrap().value, Complex64::new(2.0, 0.0));
        assert_eq!(xi_direct(XiVariant::Xi2, s, 1, 1).unwrap().value, Complex64::new(0.0, 0.0));
        let z = xi_direct(XiVariant::Xi1Star, s, 1, 1).unwrap().value;
        assert!((z.re - 1.0 / 16.0).abs() < 1e-16);
        assert!(matches!(xi_direct(XiVariant::Xi1, ComplexPair::real(1.4, 2.0), 5, 5), Err(Error::Convergence(_))));
    }

    #[test]
    fn tail_is_honest() {
        let s = ComplexPair::real(2.0, 2.5);
        let big = xi_direct(XiVariant::Xi1Star, s, 800, 800).unwrap();
        for (mc, nc) in [(50u64, 50u64), (100, 30), (30, 200)] {
            let small = xi_direct(XiVariant::Xi1Star, s, mc, nc).unwrap();
            let gap = (big.value - small.value).norm();
            assert!(gap <= small.truncation.tail_bound, "{mc}x{nc}: {gap} > {}", small.truncation.tail_bound);
        }
    }

    #[test]
    fn s_infty_tail_small_at_three() {
        let d = xi_s_infty(1, ComplexPair::real(3.0, 3.0), 2000, 2000).unwrap();
        assert!(d.truncation.tail_bound < 1e-4, "{}", d.truncation.tail_bound);
        assert!(d.value.re > 0.5 && d.value.im == 0.0);
    }
}
