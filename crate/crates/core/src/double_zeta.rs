//! The explicit-formula side: character sums for ξ̃^S, Fourier inversion to ξ^S, Ξ^S, the
//! functional-equation verifiers, D_m, L_m and the generalized Cohen function.

use crate::arith::{enumerate_discriminants, kronecker_pos, mobius, sigma_k};
use crate::characters::{g_tilde_matrix, gamma_cap_s, LocalQuadChar, OmegaS, Place, QuadraticCharacter};
use crate::error::{invalid, Error, Result};
use crate::lfun::{l_derivative, l_nonpositive_exact, l_partial, l_value, zeta_partial, ComplexPair, EvalConfig};
use crate::scalar::KahanSum;
use crate::special::{cos_pi, gamma, sin_pi, zeta_upper};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Sorted, deduplicated S; must contain ∞.
pub fn canonical_places(places: &[Place]) -> Result<Vec<Place>> {
    let mut v = places.to_vec();
    v.sort();
    v.dedup();
    if v.first() != Some(&Place::Infinite) {
        return invalid("S must contain the infinite place");
    }
    Ok(v)
}

/// Largest |D| whose prime-to-S conductor can be ≤ x.
fn discriminant_bound(places: &[Place], x: u64) -> u64 {
    places.iter().filter_map(|v| v.prime()).fold(x, |acc, p| acc * if p == 2 { 8 } else { p })
}

/// A global character together with its S-components and prime-to-S conductor.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub chi: QuadraticCharacter,
    pub omega: OmegaS,
    pub conductor_s: u64,
}

/// All χ_D with prime-to-S conductor ≤ x, sorted by that conductor, then D.
pub fn enumerate_all_chars(places: &[Place], x: u64) -> Result<Vec<FamilyMember>> {
    let places = canonical_places(places)?;
    let mut out: Vec<FamilyMember> = enumerate_discriminants(discriminant_bound(&places, x), None)
        .into_iter()
        .map(QuadraticCharacter::new)
        .filter_map(|chi| {
            let n = chi.conductor_prime_to(&places);
            (n <= x).then(|| FamilyMember { omega: OmegaS::of_character(&chi, &places), chi, conductor_s: n })
        })
        .collect();
    out.sort_by_key(|m| (m.conductor_s, m.chi.discriminant().unsigned_abs(), -m.chi.discriminant()));
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalCharFamily {
    pub omega: OmegaS,
    pub conductor_bound: u64,
    pub members: Vec<QuadraticCharacter>,
}

pub fn enumerate_chars(omega: &OmegaS, x: u64) -> Result<GlobalCharFamily> {
    let members = enumerate_all_chars(&omega.places(), x)?.into_iter().filter(|m| m.omega == *omega).map(|m| m.chi).collect();
    Ok(GlobalCharFamily { omega: omega.clone(), conductor_bound: x, members })
}

/// Σ_χ L^S(a, χ)/(L^S(b, χ) N(𝔣_χ^S)^e) split by ω_S, with the half-cut partial sums.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BucketSum {
    pub omega: OmegaS,
    pub value: Complex64,
    pub value_half: Complex64,
    pub eval_error: f64,
    pub terms: usize,
}

fn term(m: &FamilyMember, a: Complex64, b: Complex64, e: Complex64, places: &[Place], cfg: &EvalConfig) -> Result<(Complex64, f64)> {
    let la = l_partial(a, &m.chi, places, cfg)?;
    let lb = l_partial(b, &m.chi, places, cfg)?;
    if lb.value.norm() == 0.0 {
        return Err(Error::Pole(format!("L^S({b}, χ_{}) = 0 in a denominator", m.chi.discriminant())));
    }
    let w = c(m.conductor_s as f64).powc(-e);
    let v = la.value / lb.value * w;
    let err = (la.error / lb.value.norm() + la.value.norm() * lb.error / lb.value.norm_sqr()) * w.norm();
    Ok((v, err))
}

pub fn chi_sums(
    places: &[Place],
    family: &[FamilyMember],
    x: u64,
    a: Complex64,
    b: Complex64,
    e: Complex64,
    cfg: &EvalConfig,
) -> Result<Vec<BucketSum>> {
    let places = canonical_places(places)?;
    let omegas = OmegaS::all(&places);
    let index: HashMap<&OmegaS, usize> = omegas.iter().enumerate().map(|(i, o)| (o, i)).collect();
    let terms: Vec<(Complex64, f64)> = family.par_iter().map(|m| term(m, a, b, e, &places, cfg)).collect::<Result<_>>()?;
    let mut acc: Vec<KahanSum<Complex64>> = vec![KahanSum::new(); omegas.len()];
    let mut half: Vec<Option<Complex64>> = vec![None; omegas.len()];
    let mut errs = vec![0.0; omegas.len()];
    let mut counts = vec![0usize; omegas.len()];
    for (m, (v, err)) in family.iter().zip(terms) {
        if m.conductor_s > x {
            continue;
        }
        let i = index[&m.omega];
        if 2 * m.conductor_s > x && half[i].is_none() {
            half[i] = Some(acc[i].value());
        }
        acc[i].add(v);
        errs[i] += err;
        counts[i] += 1;
    }
    Ok(omegas
        .into_iter()
        .enumerate()
        .map(|(i, omega)| {
            let value = acc[i].value();
            let value_half = half[i].unwrap_or(value);
            BucketSum { omega, value, value_half, eval_error: errs[i], terms: counts[i] }
        })
        .collect())
}

/// Number of χ with a given prime-to-S conductor is at most this.
fn chars_per_conductor(places: &[Place]) -> f64 {
    places.iter().filter_map(|v| v.prime()).fold(2.0, |acc, p| acc * if p == 2 { 3.0 } else { 2.0 })
}

/// (C, g, certified) with |L^S(a, χ)| ≤ C N(𝔣_χ^S)^g.
fn numerator_bound(places: &[Place], a: Complex64) -> Result<(f64, f64, bool)> {
    let euler = |sigma: f64| -> f64 { places.iter().filter_map(|v| v.prime()).map(|p| 1.0 + (p as f64).powf(-sigma)).product() };
    let gamma_max = |z: Complex64| -> Result<f64> {
        let mut m: f64 = 0.0;
        for om in OmegaS::all(places) {
            m = m.max(gamma_cap_s(&om, z)?.norm());
        }
        Ok(m)
    };
    let sigma = a.re;
    if sigma > 1.0 {
        Ok((zeta_upper(sigma) * euler(sigma), 0.0, true))
    } else if sigma < 0.0 {
        let one_minus = Complex64::new(1.0, 0.0) - a;
        Ok((gamma_max(one_minus)? * zeta_upper(1.0 - sigma) * euler(1.0 - sigma), 0.5 - sigma, true))
    } else {
        // convexity interpolation between σ = -η and σ = 1 + η (heuristic)
        let eta = 0.1;
        let left = gamma_max(Complex64::new(1.0 + eta, a.im))? * zeta_upper(1.0 + eta) * euler(1.0 + eta);
        let right = zeta_upper(1.0 + eta) * euler(1.0 + eta);
        let g = (0.5 + eta) * (1.0 + eta - sigma) / (1.0 + 2.0 * eta);
        Ok((left.max(right), g, false))
    }
}

/// Bound on Σ over χ with N(𝔣_χ^S) > x of |L^S(a,χ)/(L^S(b,χ) N^e)|.
pub fn chi_tail(places: &[Place], x: u64, a: Complex64, b: Complex64, e: Complex64) -> Result<(f64, bool)> {
    if b.re <= 1.0 {
        return Err(Error::Convergence(format!("denominator L^S at Re = {} ≤ 1", b.re)));
    }
    let (cn, g, certified) = numerator_bound(places, a)?;
    let inv_b = zeta_upper(b.re);
    let expo = e.re - g;
    if expo <= 1.0 {
        return Err(Error::Convergence(format!("χ-sum tail diverges: Re(e) - growth = {expo:.3} ≤ 1")));
    }
    let x = (x as f64).max(1.0);
    let tail = chars_per_conductor(places) * cn * inv_b * x.powf(1.0 - expo) / (expo - 1.0);
    Ok((tail, certified))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplicitValue {
    pub omega: OmegaS,
    pub value: Complex64,
    /// value truncated at X/2, for stabilization diagnostics
    pub value_half: Complex64,
    pub tail: f64,
    pub eval_error: f64,
    pub certified: bool,
    pub terms: usize,
}

impl ExplicitValue {
    pub fn uncertainty(&self) -> f64 {
        self.tail + self.eval_error
    }
}

fn scale_bucket(b: BucketSum, pref: Estimate2, tail: (f64, bool)) -> ExplicitValue {
    ExplicitValue {
        omega: b.omega,
        value: b.value * pref.value,
        value_half: b.value_half * pref.value,
        tail: tail.0 * pref.value.norm(),
        eval_error: b.eval_error * pref.value.norm() + pref.error * b.value.norm(),
        certified: tail.1,
        terms: b.terms,
    }
}

#[derive(Clone, Copy)]
struct Estimate2 {
    value: Complex64,
    error: f64,
}

fn zeta_product(args: &[Complex64], places: &[Place], cfg: &EvalConfig) -> Result<Estimate2> {
    let mut value = c(1.0);
    let mut rel = 0.0;
    for &z in args {
        let e = zeta_partial(z, places, cfg)?;
        value *= e.value;
        rel += e.error / e.value.norm().max(f64::MIN_POSITIVE);
    }
    Ok(Estimate2 { value, error: rel * value.norm() })
}

/// Evaluates ξ̃^S or Ξ^S at s for every ω_S in one pass over the characters.
fn explicit_all(s: ComplexPair, places: &[Place], x: u64, cfg: &EvalConfig, normalized: bool) -> Result<Vec<ExplicitValue>> {
    let places = canonical_places(places)?;
    let family = enumerate_all_chars(&places, x)?;
    explicit_with_family(s, &places, &family, x, cfg, normalized)
}

fn explicit_with_family(
    s: ComplexPair,
    places: &[Place],
    family: &[FamilyMember],
    x: u64,
    cfg: &EvalConfig,
    normalized: bool,
) -> Result<Vec<ExplicitValue>> {
    let b = s.s1 * 2.0 + s.s2;
    let first = if normalized { s.s1 * 2.0 } else { s.s1 };
    let pref = zeta_product(&[first, s.s1 * 2.0 + s.s2 * 2.0 - 1.0], places, cfg)?;
    let tail = chi_tail(places, x, s.s2, b, s.s1)?;
    let sums = chi_sums(places, family, x, s.s2, b, s.s1, cfg)?;
    Ok(sums.into_iter().map(|bk| scale_bucket(bk, pref, tail)).collect())
}

fn pick(all: Vec<ExplicitValue>, omega: &OmegaS) -> ExplicitValue {
    all.into_iter().find(|v| v.omega == *omega).expect("ω_S is a character of the same S")
}

/// ξ̃^S(s, ω_S) = ζ^S(s1) ζ^S(2s1+2s2-1) Σ_χ L^S(s2,χ)/(L^S(2s1+s2,χ) N(𝔣_χ^S)^{s1}).
pub fn xi_tilde_explicit(s: ComplexPair, omega: &OmegaS, x: u64, cfg: &EvalConfig) -> Result<ExplicitValue> {
    Ok(pick(explicit_all(s, &omega.places(), x, cfg, false)?, omega))
}

pub fn xi_tilde_all(s: ComplexPair, places: &[Place], x: u64, cfg: &EvalConfig) -> Result<Vec<ExplicitValue>> {
    explicit_all(s, places, x, cfg, false)
}

/// Ξ^S(s, ω_S) = ζ^S(2s1)/ζ^S(s1) · ξ̃^S(s, ω_S).
pub fn xi_cap(s: ComplexPair, omega: &OmegaS, x: u64, cfg: &EvalConfig) -> Result<ExplicitValue> {
    Ok(pick(explicit_all(s, &omega.places(), x, cfg, true)?, omega))
}

pub fn xi_cap_all(s: ComplexPair, places: &[Place], x: u64, cfg: &EvalConfig) -> Result<Vec<ExplicitValue>> {
    explicit_all(s, places, x, cfg, true)
}

/// |2|_S = Π_{v∈S} |2|_v.
pub fn abs_two_s(places: &[Place]) -> f64 {
    places.iter().map(|v| v.abs_two()).product()
}

/// ξ^S(s, δ_S) = (|2|_S / 2^{|S|+1}) Σ_ω ω(δ_S) ξ̃^S(s, ω), δ_S one representative per place of sorted S.
pub fn xi_delta_from(tildes: &[ExplicitValue], delta: &[i64]) -> Result<(Complex64, f64)> {
    let places = tildes.first().map(|t| t.omega.places()).ok_or_else(|| Error::InvalidInput("no characters".into()))?;
    if delta.len() != places.len() || delta.contains(&0) {
        return invalid("δ_S needs one nonzero representative per place");
    }
    let pref = abs_two_s(&places) / 2f64.powi(places.len() as i32 + 1);
    let mut v = c(0.0);
    let mut err = 0.0;
    for t in tildes {
        v += t.value * t.omega.eval(delta) as f64;
        err += t.uncertainty();
    }
    Ok((v * pref, err * pref))
}

pub fn xi_delta(s: ComplexPair, delta: &[i64], places: &[Place], x: u64, cfg: &EvalConfig) -> Result<(Complex64, f64)> {
    xi_delta_from(&xi_tilde_all(s, places, x, cfg)?, delta)
}

/// (2^{|S|+1} / (|Q_S^×/(Q_S^×)²| |2|_S)) Σ_δ ω(δ) ξ^S(s, δ).
pub fn xi_tilde_from_deltas(values: &[(Vec<i64>, Complex64)], omega: &OmegaS) -> Complex64 {
    let places = omega.places();
    let n = values.len() as f64;
    let pref = 2f64.powi(places.len() as i32 + 1) / (n * abs_two_s(&places));
    values.iter().map(|(d, v)| *v * omega.eval(d) as f64).sum::<Complex64>() * pref
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeResidual {
    pub omega: OmegaS,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// combined truncation tails and evaluation errors of both sides
    pub uncertainty: f64,
    pub certified: bool,
    /// |residual(X) - residual(X/2)|
    pub stabilization: f64,
}

/// First functional equation: Ξ^S(s1+s2-1/2, 1-s2, ω) = Γ_S(s2, ω) Ξ^S(s, ω), for every ω_S of S.
pub fn verify_fe1_all(s: ComplexPair, places: &[Place], x: u64, cfg: &EvalConfig) -> Result<Vec<FeResidual>> {
    let sp = ComplexPair::new(s.s1 + s.s2 - 0.5, Complex64::new(1.0, 0.0) - s.s2);
    let left = xi_cap_all(sp, places, x, cfg)?;
    let right = xi_cap_all(s, places, x, cfg)?;
    left.into_iter()
        .zip(right)
        .map(|(l, r)| {
            let g = gamma_cap_s(&l.omega, s.s2)?;
            let rhs = g * r.value;
            let rhs_half = g * r.value_half;
            let residual = (l.value - rhs).norm();
            Ok(FeResidual {
                residual,
                stabilization: (residual - (l.value_half - rhs_half).norm()).abs(),
                uncertainty: l.uncertainty() + g.norm() * r.uncertainty(),
                certified: l.certified && r.certified,
                lhs: l.value,
                rhs,
                omega: l.omega,
            })
        })
        .collect()
}

pub fn verify_fe1(s: ComplexPair, omega: &OmegaS, x: u64, cfg: &EvalConfig) -> Result<FeResidual> {
    Ok(verify_fe1_all(s, &omega.places(), x, cfg)?.into_iter().find(|r| r.omega == *omega).expect("ω in S"))
}

/// Single-character form of the first functional equation: the quadratic functional equation with prime-to-S conductor.
pub fn verify_functquad(s: Complex64, chi: &QuadraticCharacter, places: &[Place], cfg: &EvalConfig) -> Result<f64> {
    let places = canonical_places(places)?;
    let omega = OmegaS::of_character(chi, &places);
    let n = chi.conductor_prime_to(&places) as f64;
    let lhs = l_partial(Complex64::new(1.0, 0.0) - s, chi, &places, cfg)?.value;
    let rhs = c(n).powc(s - 0.5) * gamma_cap_s(&omega, s)? * l_partial(s, chi, &places, cfg)?.value;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// G̃_S(s, χ_S, ω_S) = Π_{v∈S} G̃_v(s, χ_v, ω_v).
pub fn g_tilde_s(s: ComplexPair, places: &[Place]) -> Result<impl Fn(&OmegaS, &OmegaS) -> Complex64> {
    let places = canonical_places(places)?;
    let mats: Vec<_> = places.iter().map(|&v| g_tilde_matrix(s.s1, s.s2, v).map(|m| (v, m))).collect::<Result<_>>()?;
    Ok(move |chi: &OmegaS, om: &OmegaS| {
        mats.iter()
            .map(|(v, m)| {
                let a: &LocalQuadChar = chi.component(*v).expect("component");
                let b: &LocalQuadChar = om.component(*v).expect("component");
                m.get(a, b)
            })
            .product()
    })
}

/// Second functional equation: Ξ^S((s1, 3/2-s1-s2), ω) = Σ_χ G̃_S(s, χ, ω) Ξ^S(s, χ); S must contain 2.
pub fn verify_fe2_all(s: ComplexPair, places: &[Place], x: u64, cfg: &EvalConfig) -> Result<Vec<FeResidual>> {
    let places = canonical_places(places)?;
    if !places.contains(&Place::Finite(2)) {
        return invalid("the second functional equation needs 2 ∈ S");
    }
    let sp = ComplexPair::new(s.s1, Complex64::new(1.5, 0.0) - s.s1 - s.s2);
    let left = xi_cap_all(sp, &places, x, cfg)?;
    let right = xi_cap_all(s, &places, x, cfg)?;
    let g = g_tilde_s(s, &places)?;
    left.into_iter()
        .map(|l| {
            let mut rhs = c(0.0);
            let mut rhs_half = c(0.0);
            let mut unc = l.uncertainty();
            for r in &right {
                let w = g(&r.omega, &l.omega);
                rhs += w * r.value;
                rhs_half += w * r.value_half;
                unc += w.norm() * r.uncertainty();
            }
            let residual = (l.value - rhs).norm();
            Ok(FeResidual {
                residual,
                stabilization: (residual - (l.value_half - rhs_half).norm()).abs(),
                uncertainty: unc,
                certified: l.certified && right.iter().all(|r| r.certified),
                lhs: l.value,
                rhs,
                omega: l.omega,
            })
        })
        .collect()
}

pub fn verify_fe2(s: ComplexPair, omega: &OmegaS, x: u64, cfg: &EvalConfig) -> Result<FeResidual> {
    Ok(verify_fe2_all(s, &omega.places(), x, cfg)?.into_iter().find(|r| r.omega == *omega).expect("ω in S"))
}

/// ξ_j* from the D-sum: 2^{-2s2-1} ζ(s1) ζ(2s1+2s2-1) Σ_D sgn(D)^{j-1} L(s2,χ_D)/(L(2s1+s2,χ_D)|D|^{s1}).
pub fn xi_star_explicit(j: u8, s: ComplexPair, x: u64, cfg: &EvalConfig) -> Result<(Complex64, f64)> {
    let places = [Place::Infinite];
    let all = xi_tilde_all(s, &places, x, cfg)?;
    let sign = if j == 1 { 1.0 } else { -1.0 };
    // Σ_D sgn(D)^{j-1}(...) = ξ̃(1) + sign ξ̃(sgn)
    let mut v = c(0.0);
    let mut err = 0.0;
    for t in &all {
        let w = if t.omega.is_trivial() { 1.0 } else { sign };
        v += t.value * w;
        err += t.uncertainty();
    }
    let f = c(2.0).powc(-s.s2 * 2.0 - 1.0);
    Ok((v * f, err * f.norm()))
}

/// ξ_j from the variables-interchanged D-sum:
/// ζ(s1)ζ(2s2)ζ(2s1+2s2-1)/(2ζ(2s1)) Σ_{(-1)^{j-1}D>0} L(s1,χ_D)/(L(s1+2s2,χ_D)|D|^{s2}).
pub fn xi_j_explicit(j: u8, s: ComplexPair, x: u64, cfg: &EvalConfig) -> Result<(Complex64, f64)> {
    let places = [Place::Infinite];
    let family = enumerate_all_chars(&places, x)?;
    let b = s.s1 + s.s2 * 2.0;
    let sums = chi_sums(&places, &family, x, s.s1, b, s.s2, cfg)?;
    let want_trivial = j == 1;
    let bucket = sums.into_iter().find(|bk| bk.omega.is_trivial() == want_trivial).expect("both ω at ∞");
    let num = zeta_product(&[s.s1, s.s2 * 2.0, s.s1 * 2.0 + s.s2 * 2.0 - 1.0], &places, cfg)?;
    let den = zeta_partial(s.s1 * 2.0, &places, cfg)?;
    let pref = num.value / den.value / 2.0;
    let (tail, _) = chi_tail(&places, x, s.s1, b, s.s2)?;
    Ok((bucket.value * pref, (tail + bucket.eval_error) * pref.norm() + num.error / den.value.norm()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShintaniResidual {
    pub branch: u8,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub uncertainty: f64,
}

/// Shintani's functional equation for ξ_j: j = 1 (cos branch), j = 2 (sin branch).
pub fn verify_shintani_fe(j: u8, s: ComplexPair, x: u64, cfg: &EvalConfig) -> Result<ShintaniResidual> {
    let one = Complex64::new(1.0, 0.0);
    let places = [Place::Infinite];
    let sp = ComplexPair::new(one - s.s1, s.s1 + s.s2 - 0.5);
    let (l, le) = xi_j_explicit(j, sp, x, cfg)?;
    let (r, re) = xi_j_explicit(j, s, x, cfg)?;
    let lf = zeta_partial(c(2.0) - s.s1 * 2.0, &places, cfg)?.value / zeta_partial(one - s.s1, &places, cfg)?.value;
    let trig = if j == 1 { cos_pi(s.s1 / 2.0) } else { sin_pi(s.s1 / 2.0) };
    let rf = c(2.0).powc(one - s.s1) * c(PI).powc(-s.s1) * gamma(s.s1) * zeta_partial(s.s1 * 2.0, &places, cfg)?.value
        / zeta_partial(s.s1, &places, cfg)?.value
        * trig;
    let lhs = lf * l;
    let rhs = rf * r;
    Ok(ShintaniResidual { branch: j, lhs, rhs, residual: (lhs - rhs).norm(), uncertainty: lf.norm() * le + rf.norm() * re })
}

/// The new functional equation for ξ_1* + (-1)^k ξ_2*: k = 0 (cos branch), k = 1 (sin branch).
pub fn verify_new_fe(k: u8, s: ComplexPair, x: u64, cfg: &EvalConfig) -> Result<ShintaniResidual> {
    let one = Complex64::new(1.0, 0.0);
    let places = [Place::Infinite];
    let sign = if k == 0 { 1.0 } else { -1.0 };
    let combo = |p: ComplexPair| -> Result<(Complex64, f64)> {
        let (a, ae) = xi_star_explicit(1, p, x, cfg)?;
        let (b, be) = xi_star_explicit(2, p, x, cfg)?;
        Ok((a + b * sign, ae + be))
    };
    let sp = ComplexPair::new(s.s1 + s.s2 - 0.5, one - s.s2);
    let (l, le) = combo(sp)?;
    let (r, re) = combo(s)?;
    let lf = zeta_partial(s.s1 * 2.0 + s.s2 * 2.0 - 1.0, &places, cfg)?.value / zeta_partial(s.s1 + s.s2 - 0.5, &places, cfg)?.value;
    let trig = if k == 0 { cos_pi(s.s2 / 2.0) } else { sin_pi(s.s2 / 2.0) };
    let rf = c(2.0).powc(s.s2 * 3.0 - 1.0) * c(PI).powc(-s.s2) * gamma(s.s2) * zeta_partial(s.s1 * 2.0, &places, cfg)?.value
        / zeta_partial(s.s1, &places, cfg)?.value
        * trig;
    let lhs = lf * l;
    let rhs = rf * r;
    Ok(ShintaniResidual { branch: k, lhs, rhs, residual: (lhs - rhs).norm(), uncertainty: lf.norm() * le + rf.norm() * re })
}

/// The point (s - m/2 + 1/2, m/2).
pub fn dm_point(s: Complex64, m: u32) -> ComplexPair {
    let h = m as f64 / 2.0;
    ComplexPair::new(s - h + 0.5, c(h))
}

/// D_m(s, ω_S) = ζ^S(2s-m+1) ζ^S(2s) Σ_χ L^S(m/2,χ)/(L^S(2s-m/2+1,χ) N(𝔣_χ^S)^{s-m/2+1/2}).
pub fn d_m_value(s: Complex64, m: u32, omega: &OmegaS, x: u64, cfg: &EvalConfig) -> Result<ExplicitValue> {
    if m == 0 {
        return invalid("m must be positive");
    }
    let pole = (m as f64 + 1.0) / 2.0;
    if s == c(pole) || (m == 1 && s == c(1.0)) {
        return Err(Error::Pole(format!("D_{m} has a pole at s = {pole}")));
    }
    let p = dm_point(s, m);
    let places = canonical_places(&omega.places())?;
    let family: Vec<FamilyMember> = enumerate_all_chars(&places, x)?.into_iter().filter(|f| f.omega == *omega).collect();
    let b = p.s1 * 2.0 + p.s2;
    let pref = zeta_product(&[s * 2.0 - m as f64 + 1.0, s * 2.0], &places, cfg)?;
    let tail = chi_tail(&places, x, p.s2, b, p.s1)?;
    let sums = chi_sums(&places, &family, x, p.s2, b, p.s1, cfg)?;
    let bucket = sums.into_iter().find(|bk| bk.omega == *omega).expect("ω in S");
    Ok(scale_bucket(bucket, pref, tail))
}

/// Which of the four (ω_∞, m) cases applies; 1..=4 for (i)..(iv).
pub fn cohen_case(m: u32, omega: &OmegaS) -> u8 {
    let even = omega.infinite().is_trivial();
    match (even, m % 4) {
        (true, 2) => 2,
        (true, _) => 1,
        (false, 0) => 4,
        (false, _) => 3,
    }
}

/// δ_ω: 0 for ω_∞ trivial, 1 for sgn.
pub fn delta_omega(omega: &OmegaS) -> i64 {
    if omega.infinite().is_trivial() {
        0
    } else {
        1
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CohenValue {
    pub n: u64,
    pub d: i64,
    pub f: u64,
    pub value: f64,
    /// exact rational value as "p/q" in cases (i)/(iii) with m even
    pub exact: Option<String>,
    pub error: f64,
}

/// The unique N = (-1)^{δ_ω} D f² with D ∈ 𝔇(ω_S).
pub fn decompose_n(n: u64, omega: &OmegaS) -> Option<(i64, u64)> {
    let sign = if delta_omega(omega) == 0 { 1 } else { -1 };
    let mut f = 1u64;
    while f * f <= n {
        if n % (f * f) == 0 {
            let d = sign * (n / (f * f)) as i64;
            if let Ok(chi) = QuadraticCharacter::from_int(d) {
                if omega.matches(&chi) {
                    return Some((d, f));
                }
            }
        }
        f += 1;
    }
    None
}

/// Σ_{u|f} μ(u) χ_D(u) u^{m/2-1} σ_{m-1}(f/u).
pub fn cohen_divisor_sum(m: u32, d: i64, f: u64) -> f64 {
    let mut acc = 0.0;
    for u in 1..=f {
        if f % u != 0 {
            continue;
        }
        let mu = mobius(u) as f64;
        if mu == 0.0 {
            continue;
        }
        let chi = kronecker_pos(d, u) as f64;
        let sig = sigma_k(f / u, m - 1).to_f64().unwrap_or(f64::INFINITY);
        acc += mu * chi * (u as f64).powf(m as f64 / 2.0 - 1.0) * sig;
    }
    acc
}

/// The L-factor of H: L(1-m/2, χ_D) in cases (i)/(iii), L'(1-m/2, χ_D) in (ii)/(iv).
pub fn cohen_l_factor(m: u32, chi: &QuadraticCharacter, case: u8, cfg: &EvalConfig) -> Result<(f64, f64, Option<String>)> {
    let s = 1.0 - m as f64 / 2.0;
    if case == 1 || case == 3 {
        if m % 2 == 0 {
            let q = l_nonpositive_exact(m / 2, chi)?;
            return Ok((q.to_f64().unwrap_or(f64::NAN), 0.0, Some(q.to_string())));
        }
        let v = l_value(c(s), chi, cfg)?;
        Ok((v.value.re, v.error, None))
    } else {
        let v = l_derivative(c(s), chi, cfg)?;
        Ok((v.value.re, v.error, None))
    }
}

pub fn cohen_h(m: u32, n: u64, omega: &OmegaS, cfg: &EvalConfig) -> Result<CohenValue> {
    let (d, f) = decompose_n(n, omega).ok_or_else(|| Error::InvalidInput(format!("N = {n} is not in 𝔑(ω_S)")))?;
    let chi = QuadraticCharacter::from_int(d)?;
    let (l, le, exact) = cohen_l_factor(m, &chi, cohen_case(m, omega), cfg)?;
    let w = cohen_divisor_sum(m, d, f);
    let exact = exact.filter(|_| w.fract() == 0.0 && w.abs() < 9e15).map(|q| {
        let r: num_rational::BigRational = q.parse().expect("rational");
        (r * num_rational::BigRational::from_integer((w as i64).into())).to_string()
    });
    Ok(CohenValue { n, d, f, value: l * w, exact, error: le * w.abs() })
}

/// (N, D, f) for every N ≤ x in 𝔑(ω_S), sorted by N.
pub fn enumerate_n(omega: &OmegaS, x: u64) -> Result<Vec<(u64, i64, u64)>> {
    canonical_places(&omega.places())?;
    let mut out = Vec::new();
    for d in enumerate_discriminants(x, Some(omega)) {
        let dv = d.value();
        let ad = dv.unsigned_abs();
        if (delta_omega(omega) == 0) != (dv > 0) {
            continue;
        }
        let mut f = 1u64;
        while ad * f * f <= x {
            out.push((ad * f * f, dv, f));
            f += 1;
        }
    }
    out.sort();
    Ok(out)
}

/// The prefactor turning D_m into L_m for S = {∞} ∪ S_0, including N(𝔣_{ω_p})^{-(s-m/2+1/2)} at ramified ω_p.
pub fn l_m_prefactor(s: Complex64, m: u32, omega: &OmegaS) -> Result<Complex64> {
    let h = m as f64 / 2.0;
    let one = c(1.0);
    let case_const = match cohen_case(m, omega) {
        1 => (PI * m as f64 / 4.0).cos(),
        2 => PI / 2.0 * (PI * m as f64 / 4.0).sin(),
        3 => (PI * m as f64 / 4.0).sin(),
        _ => -PI / 2.0 * (PI * m as f64 / 4.0).cos(),
    };
    if case_const.abs() < 1e-12 {
        return Err(Error::InvalidInput(format!("case constant vanishes for m = {m}")));
    }
    let mut r = c(2.0 * (2.0 * PI).powf(-h) * crate::special::gamma_real(h) * case_const);
    for comp in omega.components() {
        let Some(p) = comp.place().prime() else { continue };
        let pc = c(p as f64);
        let w = if comp.is_ramified() { 0.0 } else { comp.value_at_p() as f64 };
        if comp.is_ramified() {
            r *= c(comp.conductor_norm() as f64).powc(-(s - h + 0.5));
        }
        let num = one - pc.powc(-s * 2.0 + h - 1.0) * w;
        let den = (one - pc.powc(-s * 2.0)) * (one - pc.powc(-s * 2.0 + m as f64 - 1.0)) * (1.0 - w * (p as f64).powf(-h));
        r *= num / den;
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LmCheck {
    pub m: u32,
    pub s: Complex64,
    pub series: Complex64,
    pub l_m: Complex64,
    pub residual: f64,
    pub n_terms: usize,
    pub series_tail: f64,
    pub dm_uncertainty: f64,
}

/// |Σ_{N≤x} H(m/2,N,ω) N^{-s} - L_m(s,ω)| with D_m evaluated from characters of conductor ≤ x_chars.
pub fn l_m_coefficient_check(m: u32, omega: &OmegaS, s: Complex64, x: u64, x_chars: u64, cfg: &EvalConfig) -> Result<LmCheck> {
    if s.re <= (m as f64 + 1.0) / 2.0 {
        return Err(Error::Convergence(format!("Re(s) must exceed (m+1)/2 = {}", (m as f64 + 1.0) / 2.0)));
    }
    let ns = enumerate_n(omega, x)?;
    let case = cohen_case(m, omega);
    let mut lcache: HashMap<i64, f64> = HashMap::new();
    for &(_, d, _) in &ns {
        if let std::collections::hash_map::Entry::Vacant(e) = lcache.entry(d) {
            let chi = QuadraticCharacter::from_int(d)?;
            e.insert(cohen_l_factor(m, &chi, case, cfg)?.0);
        }
    }
    let mut acc = KahanSum::<Complex64>::new();
    for &(n, d, f) in &ns {
        let h = lcache[&d] * cohen_divisor_sum(m, d, f);
        acc.add(c(n as f64).powc(-s) * h);
    }
    let dm = d_m_value(s, m, omega, x_chars, cfg)?;
    let l_m = dm.value * l_m_prefactor(s, m, omega)?;
    let series = acc.value();
    // |H(m/2,N)| ≤ |L-factor| d(f) f^{m-1}·ζ-type constant; reported as the size of the last term block.
    let last = ns.iter().rev().take(ns.len().min(50)).map(|&(n, d, f)| (lcache[&d] * cohen_divisor_sum(m, d, f)).abs() * (n as f64).powf(-s.re)).sum::<f64>();
    Ok(LmCheck {
        m,
        s,
        series,
        l_m,
        residual: (series - l_m).norm(),
        n_terms: ns.len(),
        series_tail: last,
        dm_uncertainty: dm.uncertainty(),
    })
}

/// Dirichlet series Σ_χ c_χ N(𝔣_χ^S)^{-w} completed by a fitted mean-value tail.
///
/// The partial sums T(y) = Σ_{N ≤ y} c_χ are fit on a geometric grid to A y log y + B y
/// (`log_term`) or B y, and the tail ∫_X^∞ t^{-w} dT(t) is added in closed form.
fn completed_series(coeffs: &[(u64, f64)], w: f64, log_term: bool) -> Result<f64> {
    let x = coeffs.last().map(|p| p.0).ok_or_else(|| Error::InvalidInput("empty series".into()))? as f64;
    let mut head = KahanSum::<f64>::new();
    for &(n, cf) in coeffs {
        head.add(cf * (n as f64).powf(-w));
    }
    let grid: Vec<f64> = (0..10).map(|k| x * 2f64.powi(-k)).filter(|&g| g >= 16.0).collect();
    let mut pts = Vec::new();
    let mut run = 0.0;
    let mut idx = 0;
    let mut sorted = grid.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    for g in &sorted {
        while idx < coeffs.len() && coeffs[idx].0 as f64 <= *g {
            run += coeffs[idx].1;
            idx += 1;
        }
        pts.push((*g, run));
    }
    let upper: Vec<(f64, f64)> = pts[pts.len() / 2..].to_vec();
    let (a, b) = if log_term {
        crate::asym::least_squares_2(&upper, |y| y * y.ln(), |y| y)?
    } else {
        (0.0, upper.iter().map(|&(y, t)| t * y).sum::<f64>() / upper.iter().map(|&(y, _)| y * y).sum::<f64>())
    };
    // dT = (A log t + A + B) dt
    let u = w - 1.0;
    let xu = x.powf(-u);
    let tail = a * xu * (x.ln() / u + 1.0 / (u * u)) + (a + b) * xu / u;
    Ok(head.value() + tail)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoleProbe {
    pub m: u32,
    pub order: u32,
    pub points: Vec<(f64, f64)>,
    pub differences: Vec<f64>,
}

/// (s - s0)^order · D_m(s, ω) along s = s0 + 2^{-k}, k = 1..=k_max, s0 = (m+1)/2, with the
/// χ-sum completed by a fitted mean-value tail beyond conductor x.
pub fn pole_probe(m: u32, omega: &OmegaS, k_max: u32, x: u64, cfg: &EvalConfig) -> Result<PoleProbe> {
    let places = canonical_places(&omega.places())?;
    let family: Vec<FamilyMember> = enumerate_all_chars(&places, x)?.into_iter().filter(|f| f.omega == *omega).collect();
    let h = m as f64 / 2.0;
    let nums: Vec<f64> = family.par_iter().map(|f| l_partial(c(h), &f.chi, &places, cfg).map(|e| e.value.re)).collect::<Result<_>>()?;
    let s0 = (m as f64 + 1.0) / 2.0;
    let order = if m == 1 { 2 } else { 1 };
    let mut points = Vec::new();
    for k in 1..=k_max {
        let s = s0 + 2f64.powi(-(k as i32));
        let p = dm_point(c(s), m);
        let b = (p.s1 * 2.0 + p.s2).re;
        let coeffs: Vec<(u64, f64)> = family
            .iter()
            .zip(&nums)
            .map(|(f, &num)| l_partial(c(b), &f.chi, &places, cfg).map(|lb| (f.conductor_s, num / lb.value.re)))
            .collect::<Result<_>>()?;
        let series = completed_series(&coeffs, p.s1.re, m == 1)?;
        let pref = zeta_product(&[c(2.0 * s - m as f64 + 1.0), c(2.0 * s)], &places, cfg)?.value.re;
        points.push((s, (s - s0).powi(order as i32) * pref * series));
    }
    let differences = points.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    Ok(PoleProbe { m, order, points, differences })
}
