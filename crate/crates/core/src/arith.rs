//! Exact integer and rational building blocks.

use crate::characters::{OmegaS, Place, QuadraticCharacter};
use crate::error::{invalid, Result};
use crate::special::{bernoulli, binomial};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

/// Trial division by small primes, then Miller–Rabin / Pollard rho on the cofactor.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut m = n;
    let mut primes = Vec::new();
    let mut p = 2u64;
    while p * p <= m && p < 1000 {
        while m % p == 0 {
            primes.push(p);
            m /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    factor_into(m, &mut primes);
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for q in primes {
        match factors.last_mut() {
            Some((r, e)) if *r == q => *e += 1,
            _ => factors.push((q, 1)),
        }
    }
    Factorization { n, factors }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: i128, p: u64) -> u32 {
    assert!(n != 0);
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Kronecker symbol (a | n).
pub fn kronecker(a: i64, n: i64) -> Result<i8> {
    if n == 0 {
        return if a == 1 || a == -1 {
            Ok(1)
        } else {
            invalid(format!("kronecker({a}, 0) is undefined"))
        };
    }
    let mut a = a as i128;
    let mut n = n as i128;
    let mut k: i8 = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    let mut v = 0;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    if v > 0 {
        if a % 2 == 0 {
            return Ok(0);
        }
        if v % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                k = -k;
            }
        }
    }
    // Jacobi symbol (a | n), n odd positive.
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                k = -k;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        a %= n;
    }
    Ok(if n == 1 { k } else { 0 })
}

/// Kronecker symbol for inputs where it is always defined (n > 0).
pub fn kronecker_pos(a: i64, n: u64) -> i8 {
    kronecker(a, n as i64).expect("n > 0")
}

/// Hilbert symbol (a, b)_v for nonzero integers.
pub fn hilbert_symbol_int(a: i128, b: i128, v: Place) -> i8 {
    assert!(a != 0 && b != 0, "hilbert symbol needs nonzero arguments");
    match v {
        Place::Infinite => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => {
            let al = valuation(a, 2);
            let be = valuation(b, 2);
            let u = (a >> al).rem_euclid(8);
            let w = (b >> be).rem_euclid(8);
            let eps = |x: i128| ((x - 1) / 2) % 2;
            let omega = |x: i128| ((x * x - 1) / 8) % 2;
            let e = eps(u) * eps(w) + al as i128 * omega(w) + be as i128 * omega(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Finite(p) => {
            let pi = p as i128;
            let al = valuation(a, p);
            let be = valuation(b, p);
            let mut u = a;
            for _ in 0..al {
                u /= pi;
            }
            let mut w = b;
            for _ in 0..be {
                w /= pi;
            }
            let mut r: i8 = 1;
            if (al as u64 * be as u64 * ((p - 1) / 2)) % 2 == 1 {
                r = -r;
            }
            let leg = |x: i128| kronecker_pos(x.rem_euclid(pi) as i64, p);
            if be % 2 == 1 {
                r *= leg(u);
            }
            if al % 2 == 1 {
                r *= leg(w);
            }
            r
        }
    }
}

/// Hilbert symbol (a, b)_v for nonzero rationals given as (numerator, denominator).
///
/// a = n/d lies in the square class of n·d, so the rational case reduces to integers.
pub fn hilbert_symbol(a: (i64, i64), b: (i64, i64), v: Place) -> Result<i8> {
    if a.0 == 0 || a.1 == 0 || b.0 == 0 || b.1 == 0 {
        return invalid("hilbert symbol needs nonzero rationals");
    }
    let ai = a.0 as i128 * a.1 as i128;
    let bi = b.0 as i128 * b.1 as i128;
    Ok(hilbert_symbol_int(ai, bi, v))
}

/// A discriminant in {1} ∪ {fundamental discriminants}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Discriminant(i64);

impl Discriminant {
    pub fn new(d: i64) -> Result<Self> {
        if d == 1 || is_fundamental_discriminant(d) {
            Ok(Discriminant(d))
        } else {
            invalid(format!("{d} is neither 1 nor a fundamental discriminant"))
        }
    }

    pub fn one() -> Self {
        Discriminant(1)
    }

    pub fn value(self) -> i64 {
        self.0
    }

    pub fn conductor(self) -> u64 {
        self.0.unsigned_abs()
    }
}

fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).is_squarefree()
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            let r = m.rem_euclid(4);
            (r == 2 || r == 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Squarefree flags for 0..=limit by sieving squares of primes.
pub fn squarefree_sieve(limit: usize) -> Vec<bool> {
    let mut sf = vec![true; limit + 1];
    sf[0] = false;
    let mut q = 2usize;
    while q * q <= limit {
        let sq = q * q;
        let mut k = sq;
        while k <= limit {
            sf[k] = false;
            k += sq;
        }
        q += 1;
    }
    sf
}

fn fundamental_with_sieve(d: i64, sf: &[bool]) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => sf[d.unsigned_abs() as usize],
        0 => {
            let m = d / 4;
            let r = m.rem_euclid(4);
            (r == 2 || r == 3) && sf[m.unsigned_abs() as usize]
        }
        _ => false,
    }
}

/// All D in {1} ∪ fundamental discriminants with |D| ≤ bound, optionally restricted to
/// those whose local components match `constraint`. Sorted by |D|, positive first.
pub fn enumerate_discriminants(bound: u64, constraint: Option<&OmegaS>) -> Vec<Discriminant> {
    let sf = squarefree_sieve(bound as usize);
    let mut out = Vec::new();
    for n in 1..=bound as i64 {
        for d in [n, -n] {
            let ok = d == 1 || fundamental_with_sieve(d, &sf);
            if !ok {
                continue;
            }
            let disc = Discriminant(d);
            if let Some(om) = constraint {
                if !om.matches(&QuadraticCharacter::new(disc)) {
                    continue;
                }
            }
            out.push(disc);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorData {
    pub n: u64,
    pub k: u32,
    pub divisors: Vec<u64>,
    pub mobius: Vec<i8>,
    pub sigma: Vec<BigInt>,
}

/// Divisors of f in increasing order with Möbius values and σ_k of each divisor.
pub fn divisor_data(f: u64, k: u32) -> DivisorData {
    let fac = factorize(f);
    let mut divs: Vec<(u64, i8)> = vec![(1, 1)];
    for &(p, e) in &fac.factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for &(d, mu) in &divs {
            let mut pk = 1u64;
            for j in 0..=e {
                let m = match j {
                    0 => mu,
                    1 => -mu,
                    _ => 0,
                };
                next.push((d * pk, m));
                pk *= p;
            }
        }
        divs = next;
    }
    divs.sort_unstable();
    let sigma = divs.iter().map(|&(d, _)| sigma_k(d, k)).collect();
    DivisorData {
        n: f,
        k,
        divisors: divs.iter().map(|x| x.0).collect(),
        mobius: divs.iter().map(|x| x.1).collect(),
        sigma,
    }
}

pub fn mobius(n: u64) -> i8 {
    let fac = factorize(n);
    if !fac.is_squarefree() {
        0
    } else if fac.factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// σ_k(n) = Σ_{d|n} d^k, computed multiplicatively.
pub fn sigma_k(n: u64, k: u32) -> BigInt {
    let fac = factorize(n);
    let mut r = BigInt::one();
    for &(p, e) in &fac.factors {
        let pk = BigInt::from(p).pow(k);
        let mut term = BigInt::one();
        let mut acc = BigInt::one();
        for _ in 0..e {
            term *= &pk;
            acc += &term;
        }
        r *= acc;
    }
    r
}

/// Generalized Bernoulli number B_{n,χ} = f^{n-1} Σ_{a=1}^{f} χ(a) B_n(a/f).
///
/// Expanding B_n(x) = Σ_k C(n,k) B_k x^{n-k} gives Σ_k C(n,k) B_k f^{k-1} Σ_a χ(a) a^{n-k}.
pub fn generalized_bernoulli(n: u32, chi: &QuadraticCharacter) -> BigRational {
    assert!(n >= 1);
    let f = chi.conductor();
    let mut power_sums = vec![BigInt::zero(); n as usize + 1];
    for a in 1..=f {
        let c = chi.eval(a as i64);
        if c == 0 {
            continue;
        }
        let mut pw = BigInt::one();
        let big_a = BigInt::from(a);
        for e in 0..=n as usize {
            if c > 0 {
                power_sums[e] += &pw;
            } else {
                power_sums[e] -= &pw;
            }
            pw *= &big_a;
        }
    }
    let mut total = BigRational::zero();
    let fr = BigRational::from_integer(BigInt::from(f));
    for k in 0..=n as usize {
        let bk = bernoulli(k);
        if bk.is_zero() {
            continue;
        }
        let coeff = BigRational::from_integer(binomial(n as u64, k as u64)) * bk;
        let fpow = if k == 0 {
            BigRational::one() / &fr
        } else {
            let mut r = BigRational::one();
            for _ in 0..k - 1 {
                r *= &fr;
            }
            r
        };
        total += coeff * fpow * BigRational::from_integer(power_sums[n as usize - k].clone());
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(7, 1).unwrap(), 1);
        assert_eq!(kronecker(0, 5).unwrap(), 0);
        assert_eq!(kronecker(2, 7).unwrap(), 1);
        assert!(kronecker(0, 0).is_err());
        assert_eq!(kronecker(-1, 0).unwrap(), 1);
        assert_eq!(kronecker(-4, 3).unwrap(), -1);
        assert_eq!(kronecker(5, 2).unwrap(), -1);
        assert_eq!(kronecker(-3, 2).unwrap(), -1);
        assert_eq!(kronecker(8, 2).unwrap(), 0);
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        for p in (3..200u64).filter(|&p| is_prime(p)) {
            for a in -(p as i64) + 1..p as i64 {
                let r = pow_mod(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
                let expect = match r {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                };
                assert_eq!(kronecker(a, p as i64).unwrap(), expect, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn hilbert_examples() {
        for v in [Place::Infinite, Place::Finite(2), Place::Finite(3), Place::Finite(7)] {
            assert_eq!(hilbert_symbol((1, 1), (-6, 5), v).unwrap(), 1);
        }
        assert_eq!(hilbert_symbol((-1, 1), (-1, 1), Place::Infinite).unwrap(), -1);
        assert_eq!(hilbert_symbol((-1, 1), (-1, 1), Place::Finite(2)).unwrap(), -1);
        assert_eq!(hilbert_symbol((-1, 1), (2, 1), Place::Finite(2)).unwrap(), 1);
        assert_eq!(hilbert_symbol((-1, 1), (-1, 1), Place::Finite(3)).unwrap(), 1);
    }

    /// Nontrivial solvability of z² = ax² + by² by a primitive search modulo p^k.
    fn hilbert_oracle(a: i64, b: i64, p: u64, k: u32) -> i8 {
        let m = p.pow(k) as i64;
        let mut squares = vec![false; m as usize];
        for z in 0..m {
            squares[((z * z) % m) as usize] = true;
        }
        // Primitive triples: (x, y) not both divisible by p, or x, y ≡ 0 with z a unit
        // (impossible since the right side vanishes mod p). Enough to scan x, y.
        for x in 0..m {
            for y in 0..m {
                if x % p as i64 == 0 && y % p as i64 == 0 {
                    continue;
                }
                let r = (a * x % m * x % m + b * y % m * y % m).rem_euclid(m);
                if squares[r as usize] {
                    return 1;
                }
            }
        }
        -1
    }

    #[test]
    fn hilbert_matches_residue_oracle() {
        let vals = [-10i64, -7, -6, -5, -3, -2, -1, 1, 2, 3, 5, 6, 7, 10];
        for &(p, k) in &[(2u64, 7u32), (3, 5), (5, 4), (7, 3)] {
            for &a in &vals {
                for &b in &vals {
                    let h = hilbert_symbol_int(a as i128, b as i128, Place::Finite(p));
                    assert_eq!(h, hilbert_oracle(a, b, p, k), "a={a} b={b} p={p}");
                }
            }
        }
    }

    #[test]
    fn fundamental_discriminant_examples() {
        assert!(is_fundamental_discriminant(5));
        assert!(is_fundamental_discriminant(-4));
        assert!(!is_fundamental_discriminant(4));
        assert!(!is_fundamental_discriminant(1));
        assert!(is_fundamental_discriminant(-8));
        assert!(is_fundamental_discriminant(12));
        assert!(!is_fundamental_discriminant(-12 * 4));
    }

    #[test]
    fn enumerate_small() {
        let got: Vec<i64> = enumerate_discriminants(8, None).iter().map(|d| d.value()).collect();
        assert_eq!(got, vec![1, -3, -4, 5, -7, 8, -8]);
        let neg = OmegaS::parse("inf:-").unwrap();
        let got: Vec<i64> =
            enumerate_discriminants(8, Some(&neg)).iter().map(|d| d.value()).collect();
        assert_eq!(got, vec![-3, -4, -7, -8]);
        assert!(enumerate_discriminants(1, Some(&neg)).is_empty());
    }

    #[test]
    fn enumerate_matches_predicate_scan() {
        let list = enumerate_discriminants(10_000, None);
        let mut expect = vec![1i64];
        for n in 2..=10_000i64 {
            for d in [n, -n] {
                if is_fundamental_discriminant(d) {
                    expect.push(d);
                }
            }
        }
        let mut got: Vec<i64> = list.iter().map(|d| d.value()).collect();
        got.sort_unstable();
        expect.sort_unstable();
        assert_eq!(got, expect);
    }

    #[test]
    fn divisor_examples() {
        let d1 = divisor_data(1, 3);
        assert_eq!(d1.divisors, vec![1]);
        assert_eq!(d1.mobius, vec![1]);
        assert_eq!(d1.sigma, vec![BigInt::one()]);
        let d4 = divisor_data(4, 0);
        assert_eq!(d4.divisors, vec![1, 2, 4]);
        assert_eq!(d4.sigma[2], BigInt::from(3));
        assert_eq!(mobius(6), 1);
        let d6 = divisor_data(6, 1);
        assert_eq!(d6.mobius, vec![1, -1, -1, 1]);
        assert_eq!(sigma_k(12, 1), BigInt::from(28));
        assert_eq!(sigma_k(12, 2), BigInt::from(1 + 4 + 9 + 16 + 36 + 144));
    }

    #[test]
    fn bernoulli_generalized_examples() {
        let chi = |d| QuadraticCharacter::new(Discriminant::new(d).unwrap());
        assert_eq!(generalized_bernoulli(1, &chi(-4)), rat(-1, 2));
        assert_eq!(generalized_bernoulli(2, &chi(5)), rat(4, 5));
        assert_eq!(generalized_bernoulli(1, &chi(5)), rat(0, 1));
        assert_eq!(generalized_bernoulli(2, &chi(1)), rat(1, 6));
        assert_eq!(generalized_bernoulli(1, &chi(1)), rat(1, 2));
        // B_{1,χ_{-3}} = -1/3 (class number formula h(-3)=1, w=6).
        assert_eq!(generalized_bernoulli(1, &chi(-3)), rat(-1, 3));
    }

    #[test]
    fn factorize_large() {
        let n = 1_000_000_007u64 * 998_244_353;
        let f = factorize(n);
        assert_eq!(f.factors, vec![(998_244_353, 1), (1_000_000_007, 1)]);
        let f = factorize(2u64.pow(10) * 3u64.pow(4) * 97);
        assert_eq!(f.factors, vec![(2, 10), (3, 4), (97, 1)]);
    }
}
