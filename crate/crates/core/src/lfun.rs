//! Quadratic Dirichlet L-functions by the Hurwitz decomposition and Euler–Maclaurin summation.

use crate::arith::generalized_bernoulli;
use crate::characters::{Place, QuadraticCharacter};
use crate::error::{invalid, Error, Result};
use crate::scalar::{EvalScalar, KahanSum};
use crate::special::em_coefficient;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub s1: Complex64,
    pub s2: Complex64,
}

impl ComplexPair {
    pub fn new(s1: Complex64, s2: Complex64) -> Self {
        ComplexPair { s1, s2 }
    }

    pub fn real(s1: f64, s2: f64) -> Self {
        ComplexPair { s1: Complex64::new(s1, 0.0), s2: Complex64::new(s2, 0.0) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub target_abs_error: f64,
    pub max_terms: u64,
    pub euler_maclaurin_order: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { target_abs_error: 1e-12, max_terms: 1_000_000, euler_maclaurin_order: 12 }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_abs_error > 0.0) {
            return invalid("target_abs_error must be positive");
        }
        if self.max_terms == 0 {
            return invalid("max_terms must be positive");
        }
        if !(2..=30).contains(&self.euler_maclaurin_order) {
            return invalid("euler_maclaurin_order must lie in 2..=30");
        }
        Ok(())
    }
}

/// A value together with a bound on its absolute error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

impl<T> Estimate<T> {
    pub fn new(value: T, error: f64) -> Self {
        Estimate { value, error }
    }
}

/// One period of χ: `values[a] = χ(a)` for `a` in `0..f`.
#[derive(Clone, Debug)]
pub struct CharTable {
    f: u64,
    values: Vec<i8>,
}

impl CharTable {
    pub fn new(chi: &QuadraticCharacter) -> Self {
        let f = chi.conductor();
        let values = (0..f).map(|a| if f == 1 { 1 } else if a == 0 { 0 } else { chi.eval(a as i64) }).collect();
        CharTable { f, values }
    }

    pub fn conductor(&self) -> u64 {
        self.f
    }

    pub fn at(&self, n: u64) -> i8 {
        self.values[(n % self.f) as usize]
    }
}

const EPS: f64 = f64::EPSILON;

/// |B_{2K}|/(2K)! |(s)_{2K}| and the matching bound for the s-derivative of (s)_{2K}.
fn remainder_factors(s: Complex64, order: usize) -> (f64, f64) {
    let mods: Vec<f64> = (0..2 * order).map(|i| (s + i as f64).norm()).collect();
    let poch: f64 = mods.iter().product();
    let dpoch: f64 =
        (0..mods.len()).map(|i| mods.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, m)| m).product::<f64>()).sum();
    let c = em_coefficient::<f64>(order).abs();
    (c * poch, c * dpoch)
}

/// Tail bounds at x0 = n: (value, derivative), or None when the remainder integral diverges.
fn tail_bound(s: Complex64, order: usize, n: f64) -> Option<(f64, f64)> {
    let a = s.re + 2.0 * order as f64;
    if a <= 1.0 {
        return None;
    }
    let (c, cd) = remainder_factors(s, order);
    let base = n.powf(1.0 - a);
    let ln = n.ln();
    let v = c * base / (a - 1.0);
    let d = cd * base / (a - 1.0) + c * base * (ln / (a - 1.0) + 1.0 / ((a - 1.0) * (a - 1.0)));
    Some((v, d))
}

/// (exp(-uL) - 1)/u and its u-derivative, stable near u = 0.
fn expm1_ratio<T: EvalScalar>(u: T, l: f64) -> (T, T) {
    if u.modulus() * l < 0.5 {
        let mut g = T::real(0.0);
        let mut gd = T::real(0.0);
        let mut upow = T::real(1.0); // u^{k-1}
        let mut upow_prev = T::real(0.0); // u^{k-2}
        let mut coef = 1.0; // (-L)^k / k!
        for k in 1..40 {
            coef *= -l / k as f64;
            g += upow * coef;
            if k >= 2 {
                gd += upow_prev * (coef * (k - 1) as f64);
            }
            upow_prev = upow;
            upow = upow * u;
            if coef.abs() < 1e-18 {
                break;
            }
        }
        (g, gd)
    } else {
        let e = (u * (-l)).exp();
        let num = e - T::real(1.0);
        let g = num / u;
        let gd = (e * u * (-l) - num) / (u * u);
        (g, gd)
    }
}

struct Partial<T> {
    value: T,
    deriv: T,
    error: f64,
    deriv_error: f64,
}

fn pick_cutoff(s: Complex64, f: u64, cfg: &EvalConfig, want_deriv: bool) -> Result<(u64, f64, f64)> {
    let order = cfg.euler_maclaurin_order as usize;
    let scale = (f as f64).powf(1.0 - s.re);
    let lnf = (f as f64).ln();
    let mut n: u64 = 1;
    loop {
        let (b, bd) = tail_bound(s, order, n as f64).ok_or_else(|| {
            Error::Convergence(format!("Re(s) = {} too negative for Euler–Maclaurin order {order}", s.re))
        })?;
        let err = scale * b;
        let derr = scale * (bd + lnf * b);
        let governing = if want_deriv { err.max(derr) } else { err };
        if governing <= 0.25 * cfg.target_abs_error {
            return Ok((n, err, derr));
        }
        if n.saturating_mul(2).saturating_mul(f) > cfg.max_terms {
            if n * f <= cfg.max_terms {
                return Err(Error::Precision { achieved: governing });
            }
            return Err(Error::Precision { achieved: f64::INFINITY });
        }
        n *= 2;
    }
}

fn l_kernel<T: EvalScalar>(s: T, s_c: Complex64, table: &CharTable, cfg: &EvalConfig, want_deriv: bool) -> Result<Partial<T>> {
    cfg.validate()?;
    let f = table.conductor();
    let trivial = f == 1;
    if trivial && s_c == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole("ζ(s) at s = 1".into()));
    }
    let order = cfg.euler_maclaurin_order as usize;
    let (n_cut, tail_err, tail_derr) = pick_cutoff(s_c, f, cfg, want_deriv)?;

    let mut direct = KahanSum::<T>::new();
    let mut direct_d = KahanSum::<T>::new();
    let mut sq_sum = 0.0;
    let mut sq_sum_d = 0.0;
    let sigma = s_c.re;
    for n in 1..=n_cut * f {
        let c = table.at(n);
        if c == 0 {
            continue;
        }
        let ln = (n as f64).ln();
        let t = (s * (-ln)).exp();
        let mag = (-2.0 * sigma * ln).exp();
        sq_sum += mag;
        direct.add(if c > 0 { t } else { -t });
        if want_deriv {
            direct_d.add(t * (-(c as f64) * ln));
            sq_sum_d += mag * ln * ln;
        }
    }
    let (direct, direct_d) = (direct.value(), direct_d.value());

    // (s)_{2j-1} and its derivative, j = 1..K.
    let mut poch = Vec::with_capacity(order);
    let mut poch_d = Vec::with_capacity(order);
    let (mut p, mut pd) = (T::real(1.0), T::real(0.0));
    for m in 0..(2 * order - 1) {
        let factor = s + T::real(m as f64);
        pd = pd * factor + p;
        p = p * factor;
        if m % 2 == 0 {
            let j = m / 2 + 1;
            let c = em_coefficient::<f64>(j);
            poch.push(p * c);
            poch_d.push(pd * c);
        }
    }

    let u = s - T::real(1.0);
    let mut tail = KahanSum::<T>::new();
    let mut tail_d = KahanSum::<T>::new();
    let mut tail_sq = 0.0;
    for a in 1..=f {
        let c = table.at(a);
        if c == 0 {
            continue;
        }
        let x0 = n_cut as f64 + a as f64 / f as f64;
        let l = x0.ln();
        let e = (s * (-l)).exp();
        let y = 1.0 / (x0 * x0);
        // Σ_j c_j (s)_{2j-1} x0^{1-2j} by Horner in x0^{-2}.
        let mut h = T::real(0.0);
        let mut hd = T::real(0.0);
        for j in (0..order).rev() {
            h = h * y + poch[j];
            if want_deriv {
                hd = hd * y + poch_d[j];
            }
        }
        h = h * (y * x0);
        hd = hd * (y * x0);
        let (lead, lead_d) = if trivial {
            let xe = e * x0;
            (xe / u, (xe * (-l)) / u - xe / (u * u))
        } else {
            expm1_ratio(u, l)
        };
        let term = lead + e * 0.5 + e * h;
        tail_sq += term.modulus() * term.modulus();
        let cf = c as f64;
        tail.add(term * cf);
        if want_deriv {
            let term_d = lead_d + e * (-0.5 * l) + e * (hd - h * l);
            tail_d.add(term_d * cf);
        }
    }
    let (tail, tail_d) = (tail.value(), tail_d.value());
    let lnf = (f as f64).ln();
    let fs = (s * (-lnf)).exp();
    let fmag = (-sigma * lnf).exp();
    let value = direct + fs * tail;
    let deriv = direct_d + fs * (tail_d - tail * lnf);
    // Rounding: a 3-sigma estimate of independent per-term errors plus the compensated-sum residue.
    let rounding = EPS * (3.0 * (sq_sum + fmag * fmag * tail_sq).sqrt() * 2.0 + 2.0 * value.modulus());
    let rounding_d = EPS * (3.0 * (sq_sum_d + fmag * fmag * tail_sq * (1.0 + lnf * lnf)).sqrt() * 2.0 + 2.0 * deriv.modulus());
    Ok(Partial { value, deriv, error: tail_err + rounding, deriv_error: tail_derr + rounding_d })
}

/// L(s, χ_D) with a certified bound on truncation plus rounding error.
pub fn l_value(s: Complex64, chi: &QuadraticCharacter, cfg: &EvalConfig) -> Result<Estimate<Complex64>> {
    if is_trivial_zero(s.re, s.im, chi) {
        return Ok(Estimate::new(Complex64::new(0.0, 0.0), 0.0));
    }
    if let Some(v) = l_direct(s, chi, cfg) {
        return finish(v.value, v.error, cfg);
    }
    if s.im == 0.0 {
        let k = l_kernel(s.re, s, &CharTable::new(chi), cfg, false)?;
        return finish(Complex64::new(k.value, 0.0), k.error, cfg);
    }
    let k = l_kernel(s, s, &CharTable::new(chi), cfg, false)?;
    finish(k.value, k.error, cfg)
}

/// Plain Dirichlet series for Re(s) > 1 when it needs fewer terms than the conductor, the
/// minimum cost of the Hurwitz route.
fn l_direct(s: Complex64, chi: &QuadraticCharacter, cfg: &EvalConfig) -> Option<Estimate<Complex64>> {
    let sigma = s.re;
    if sigma <= 1.5 {
        return None;
    }
    // Σ_{n>N} n^{-σ} ≤ N^{1-σ}/(σ-1)
    let target = 0.25 * cfg.target_abs_error;
    let n = (target * (sigma - 1.0)).powf(-1.0 / (sigma - 1.0)).ceil();
    if !(n < chi.conductor().max(64) as f64) {
        return None;
    }
    let n = n as u64;
    let d = chi.discriminant();
    let mut acc = KahanSum::<Complex64>::new();
    let mut sq = 0.0;
    for k in 1..=n {
        let c = crate::arith::kronecker_pos(d, k);
        if c == 0 {
            continue;
        }
        let t = Complex64::new(k as f64, 0.0).powc(-s);
        sq += t.norm_sqr();
        acc.add(if c > 0 { t } else { -t });
    }
    let value = acc.value();
    let tail = (n as f64).powf(1.0 - sigma) / (sigma - 1.0);
    Some(Estimate::new(value, tail + EPS * (6.0 * sq.sqrt() + 2.0 * value.norm())))
}

/// Real-argument fast path of `l_value`.
pub fn l_value_real(s: f64, chi: &QuadraticCharacter, cfg: &EvalConfig) -> Result<Estimate<f64>> {
    l_value_real_with(s, &CharTable::new(chi), cfg)
}

pub fn l_value_real_with(s: f64, table: &CharTable, cfg: &EvalConfig) -> Result<Estimate<f64>> {
    let odd = table.conductor() > 1 && table.at(table.conductor() - 1) == -1;
    if is_trivial_zero_parity(s, 0.0, odd, table.conductor() == 1) {
        return Ok(Estimate::new(0.0, 0.0));
    }
    let k = l_kernel(s, Complex64::new(s, 0.0), table, cfg, false)?;
    finish(k.value, k.error, cfg)
}

/// The target is absolute for |value| ≤ 1 and relative above, since f64 cannot resolve 1e-12 absolute on large values.
/// L(s, χ) vanishes at s = -k for k ≥ 0 with k ≡ δ_χ (mod 2), except ζ(0) = -1/2.
fn is_trivial_zero(re: f64, im: f64, chi: &QuadraticCharacter) -> bool {
    is_trivial_zero_parity(re, im, !chi.is_even(), chi.is_trivial())
}

fn is_trivial_zero_parity(re: f64, im: f64, odd: bool, trivial: bool) -> bool {
    if im != 0.0 || re > 0.0 || re.fract() != 0.0 {
        return false;
    }
    let k = (-re) as u64;
    k % 2 == odd as u64 && !(trivial && k == 0)
}

fn finish<T: EvalScalar>(value: T, error: f64, cfg: &EvalConfig) -> Result<Estimate<T>> {
    if error > cfg.target_abs_error * value.modulus().max(1.0) {
        return Err(Error::Precision { achieved: error });
    }
    Ok(Estimate::new(value, error))
}

/// dL/ds by the termwise differentiated series.
pub fn l_derivative(s: Complex64, chi: &QuadraticCharacter, cfg: &EvalConfig) -> Result<Estimate<Complex64>> {
    let k = l_kernel(s, s, &CharTable::new(chi), cfg, true)?;
    finish(k.deriv, k.deriv_error, cfg)
}

/// L(s, χ) and L'(s, χ) at a real point from one pass.
pub fn l_value_and_derivative_real(s: f64, chi: &QuadraticCharacter, cfg: &EvalConfig) -> Result<(Estimate<f64>, Estimate<f64>)> {
    let k = l_kernel(s, Complex64::new(s, 0.0), &CharTable::new(chi), cfg, true)?;
    Ok((finish(k.value, k.error, cfg)?, finish(k.deriv, k.deriv_error, cfg)?))
}

/// Π_{p ∈ S finite} L_p(s, χ_p)^{-1} = Π (1 - χ(p) p^{-s}).
pub fn euler_factor_inverse(s: Complex64, chi: &QuadraticCharacter, places: &[Place]) -> Complex64 {
    let mut r = Complex64::new(1.0, 0.0);
    for p in places.iter().filter_map(|v| v.prime()) {
        let c = crate::arith::kronecker_pos(chi.discriminant(), p) as f64;
        if c != 0.0 {
            r *= Complex64::new(1.0, 0.0) - Complex64::new(p as f64, 0.0).powc(-s) * c;
        }
    }
    r
}

/// L^S(s, χ): L(s, χ) with the Euler factors at the finite places of S removed.
pub fn l_partial(s: Complex64, chi: &QuadraticCharacter, places: &[Place], cfg: &EvalConfig) -> Result<Estimate<Complex64>> {
    let inv = euler_factor_inverse(s, chi, places);
    if chi.is_trivial() && s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole("ζ^S(s) at s = 1".into()));
    }
    if inv.norm() == 0.0 {
        return Ok(Estimate::new(Complex64::new(0.0, 0.0), 0.0));
    }
    let l = l_value(s, chi, cfg)?;
    Ok(Estimate::new(l.value * inv, l.error * inv.norm()))
}

/// ζ^S(s).
pub fn zeta_partial(s: Complex64, places: &[Place], cfg: &EvalConfig) -> Result<Estimate<Complex64>> {
    l_partial(s, &QuadraticCharacter::trivial(), places, cfg)
}

/// L(1 - n, χ) = -B_{n,χ}/n.
pub fn l_nonpositive_exact(n: u32, chi: &QuadraticCharacter) -> Result<BigRational> {
    if n == 0 {
        return invalid("n must be positive");
    }
    Ok(-generalized_bernoulli(n, chi) / BigRational::from_integer(BigInt::from(n)))
}

/// Memo table of real-argument L-values keyed by (D, s).
#[derive(Clone, Default)]
pub struct LCache {
    inner: Arc<Mutex<HashMap<(i64, u64, u64), Estimate<Complex64>>>>,
}

impl LCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn l_value(&self, s: Complex64, chi: &QuadraticCharacter, cfg: &EvalConfig) -> Result<Estimate<Complex64>> {
        let key = (chi.discriminant(), s.re.to_bits(), s.im.to_bits());
        if let Some(v) = self.inner.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = l_value(s, chi, cfg)?;
        self.inner.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{gamma_cap_s, OmegaS};
    use num_traits::ToPrimitive;
    use std::f64::consts::PI;

    fn chi(d: i64) -> QuadraticCharacter {
        QuadraticCharacter::from_int(d).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    #[test]
    fn zeta_values() {
        let z2 = l_value(c(2.0), &chi(1), &cfg()).unwrap();
        assert!((z2.value - c(PI * PI / 6.0)).norm() < 1e-13);
        let z4 = zeta_partial(c(4.0), &[Place::Infinite], &cfg()).unwrap();
        assert!((z4.value - c(PI.powi(4) / 90.0)).norm() < 1e-13);
        let z2s = zeta_partial(c(2.0), &[Place::Infinite, Place::Finite(2)], &cfg()).unwrap();
        assert!((z2s.value - c(PI * PI / 8.0)).norm() < 1e-13);
        assert!(matches!(l_value(c(1.0), &chi(1), &cfg()), Err(Error::Pole(_))));
        let z0 = l_value(c(0.0), &chi(1), &cfg()).unwrap();
        assert!((z0.value - c(-0.5)).norm() < 1e-13);
        // ζ(1/2 + 14.134725141734693i) ≈ 0
        let rho = l_value(Complex64::new(0.5, 14.134725141734693), &chi(1), &cfg()).unwrap();
        assert!(rho.value.norm() < 1e-11);
    }

    #[test]
    fn dirichlet_values() {
        let l = l_value(c(0.0), &chi(-4), &cfg()).unwrap();
        assert!((l.value - c(0.5)).norm() < 1e-12);
        // L(1, χ_{-4}) = π/4, L(1, χ_5) = 2 ln φ / √5.
        let l1 = l_value(c(1.0), &chi(-4), &cfg()).unwrap();
        assert!((l1.value - c(PI / 4.0)).norm() < 1e-12);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let l5 = l_value(c(1.0), &chi(5), &cfg()).unwrap();
        assert!((l5.value - c(2.0 * phi.ln() / 5f64.sqrt())).norm() < 1e-12);
        // Catalan's constant.
        let g = l_value(c(2.0), &chi(-4), &cfg()).unwrap();
        assert!((g.value - c(0.915_965_594_177_219_015)).norm() < 1e-13);
        let half = l_value_real(0.5, &chi(5), &cfg()).unwrap();
        assert!(half.value > 0.0);
        let near = l_value(c(1.0 + 1e-9), &chi(-4), &cfg()).unwrap();
        assert!((near.value - l1.value).norm() < 1e-8);
    }

    #[test]
    fn order_independence() {
        let lo = EvalConfig { euler_maclaurin_order: 6, target_abs_error: 1e-10, ..cfg() };
        let hi = EvalConfig { euler_maclaurin_order: 12, target_abs_error: 1e-10, ..cfg() };
        for d in [5i64, -3, -4, 8, 12, -7, 1] {
            for &s in &[Complex64::new(0.5, 0.0), Complex64::new(0.3, 2.0), Complex64::new(-1.5, 0.7)] {
                if d == 1 && s == c(1.0) {
                    continue;
                }
                let a = l_value(s, &chi(d), &lo).unwrap();
                let b = l_value(s, &chi(d), &hi).unwrap();
                assert!((a.value - b.value).norm() <= a.error + b.error, "D={d} s={s}");
            }
        }
    }

    #[test]
    fn real_path_matches_complex_path() {
        for d in [5i64, -3, 24, -211] {
            let r = l_value_real(0.5, &chi(d), &cfg()).unwrap();
            let z = l_value(c(0.5), &chi(d), &cfg()).unwrap();
            assert!((r.value - z.value.re).abs() < 1e-13);
        }
    }

    #[test]
    fn quadratic_functional_equation() {
        let loose = EvalConfig { target_abs_error: 1e-10, ..cfg() };
        for d in [5i64, -3, -4, 8, 12, -7] {
            let x = chi(d);
            let om = OmegaS::of_character(&x, &[Place::Infinite]);
            for s in [0.3, 0.7, 1.4, 2.2] {
                let s = c(s);
                let lhs = l_value(c(1.0) - s, &x, &loose).unwrap().value;
                let rhs = Complex64::new(d.unsigned_abs() as f64, 0.0).powc(s - 0.5)
                    * gamma_cap_s(&om, s).unwrap()
                    * l_value(s, &x, &cfg()).unwrap().value;
                assert!((lhs - rhs).norm() < 1e-10, "D={d} s={s}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn negative_integers_match_bernoulli() {
        let loose = EvalConfig { target_abs_error: 1e-10, ..cfg() };
        let discs = crate::arith::enumerate_discriminants(50, None);
        for d in discs {
            let x = QuadraticCharacter::new(d);
            for n in 1..=6u32 {
                if x.is_trivial() && n == 1 {
                    continue;
                }
                let exact = l_nonpositive_exact(n, &x).unwrap().to_f64().unwrap();
                let num = l_value(c(1.0 - n as f64), &x, &loose).unwrap();
                assert!((num.value - c(exact)).norm() < 1e-10 * (1.0 + exact.abs()), "D={} n={n}", d.value());
            }
        }
    }

    #[test]
    fn exact_examples() {
        use num_traits::FromPrimitive;
        let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(l_nonpositive_exact(2, &chi(5)).unwrap(), q(-2, 5));
        assert_eq!(l_nonpositive_exact(1, &chi(-4)).unwrap(), q(1, 2));
        assert_eq!(l_nonpositive_exact(1, &chi(5)).unwrap(), BigRational::from_i64(0).unwrap());
        assert_eq!(l_nonpositive_exact(2, &chi(1)).unwrap(), q(-1, 12));
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-5;
        for (d, s) in [(-3i64, 0.0), (1, 2.0), (5, -1.0), (-4, 0.5), (8, 1.0), (-7, 0.5)] {
            let x = chi(d);
            let der = l_derivative(c(s), &x, &cfg()).unwrap().value;
            let fd = (l_value(c(s + h), &x, &cfg()).unwrap().value - l_value(c(s - h), &x, &cfg()).unwrap().value) / (2.0 * h);
            assert!((der - fd).norm() < 1e-6, "D={d} s={s}: {der} vs {fd}");
        }
        let zp2 = l_derivative(c(2.0), &chi(1), &cfg()).unwrap().value;
        assert!((zp2.re - (-0.937_548_254_315_843_8)).abs() < 1e-12);
        let (v, dv) = l_value_and_derivative_real(0.5, &chi(-3), &cfg()).unwrap();
        assert!((v.value - l_value(c(0.5), &chi(-3), &cfg()).unwrap().value.re).abs() < 1e-14);
        assert!((dv.value - l_derivative(c(0.5), &chi(-3), &cfg()).unwrap().value.re).abs() < 1e-13);
    }

    #[test]
    fn partial_reconstruction() {
        let places = [Place::Infinite, Place::Finite(2), Place::Finite(3)];
        for d in [1i64, 5, -3, -8, 12, -7] {
            let x = chi(d);
            let s = Complex64::new(1.7, 0.4);
            let full = l_value(s, &x, &cfg()).unwrap().value;
            let part = l_partial(s, &x, &places, &cfg()).unwrap().value;
            let inv = euler_factor_inverse(s, &x, &places);
            assert!((part / inv - full).norm() < 1e-14);
        }
        let m8 = l_partial(c(2.0), &chi(-8), &[Place::Infinite, Place::Finite(2)], &cfg()).unwrap().value;
        assert_eq!(m8, l_value(c(2.0), &chi(-8), &cfg()).unwrap().value);
    }

    #[test]
    fn precision_errors_are_reported() {
        let tight = EvalConfig { max_terms: 10, target_abs_error: 1e-14, euler_maclaurin_order: 2 };
        assert!(matches!(l_value(c(0.5), &chi(-211), &tight), Err(Error::Precision { .. })));
        assert!(EvalConfig { euler_maclaurin_order: 1, ..cfg() }.validate().is_err());
        assert!(matches!(l_value(c(-40.5), &chi(5), &cfg()), Err(Error::Convergence(_))));
    }

    #[test]
    fn cache_reuses_values() {
        let cache = LCache::new();
        let a = cache.l_value(c(0.5), &chi(5), &cfg()).unwrap();
        let b = cache.l_value(c(0.5), &chi(5), &cfg()).unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.len(), 1);
    }
}
