//! Local and global quadratic characters, local gamma factors, Weil constants and the
//! local functional-equation matrices.

use crate::arith::{hilbert_symbol_int, is_prime, kronecker_pos, valuation, Discriminant};
use crate::error::{invalid, Error, Result};
use crate::special::{cos_pi, gamma, is_gamma_pole, rgamma, sin_pi};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Place {
    Infinite,
    Finite(u64),
}

impl Place {
    pub fn finite(p: u64) -> Result<Place> {
        if is_prime(p) {
            Ok(Place::Finite(p))
        } else {
            invalid(format!("{p} is not prime"))
        }
    }

    pub fn prime(self) -> Option<u64> {
        match self {
            Place::Infinite => None,
            Place::Finite(p) => Some(p),
        }
    }

    /// |2|_v
    pub fn abs_two(self) -> f64 {
        match self {
            Place::Infinite => 2.0,
            Place::Finite(2) => 0.5,
            Place::Finite(_) => 1.0,
        }
    }

    /// Canonical square-class representatives of Q_v^×/(Q_v^×)².
    pub fn square_classes(self) -> Vec<i64> {
        match self {
            Place::Infinite => vec![1, -1],
            Place::Finite(2) => vec![1, -1, 5, -5, 2, -2, 10, -10],
            Place::Finite(p) => {
                let u = smallest_nonresidue(p) as i64;
                vec![1, u, p as i64, u * p as i64]
            }
        }
    }

    /// Canonical representative of the square class of a nonzero integer.
    pub fn class_of(self, x: i128) -> i64 {
        assert!(x != 0);
        match self {
            Place::Infinite => x.signum() as i64,
            Place::Finite(2) => {
                let k = valuation(x, 2);
                let w = (x >> k).rem_euclid(8) as i64;
                let w = if w > 4 { w - 8 } else { w };
                let unit = match w {
                    1 => 1,
                    -1 => -1,
                    -3 => 5,
                    3 => -5,
                    _ => unreachable!(),
                };
                if k % 2 == 0 {
                    unit
                } else {
                    2 * unit
                }
            }
            Place::Finite(p) => {
                let k = valuation(x, p);
                let mut w = x;
                for _ in 0..k {
                    w /= p as i128;
                }
                let unit = if kronecker_pos(w.rem_euclid(p as i128) as i64, p) == 1 {
                    1
                } else {
                    smallest_nonresidue(p) as i64
                };
                if k % 2 == 0 {
                    unit
                } else {
                    unit * p as i64
                }
            }
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

pub fn smallest_nonresidue(p: u64) -> u64 {
    assert!(p > 2);
    (2..p).find(|&u| kronecker_pos(u as i64, p) == -1).expect("odd prime has a non-residue")
}

/// A character of Q_v^×/(Q_v^×)².
///
/// `signs` holds the values on the generators: at ∞ the value on -1; at odd p the values
/// on the least non-residue unit and on p; at 2 the values on -1, 5 and 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocalQuadChar {
    place: Place,
    signs: [i8; 3],
}

impl LocalQuadChar {
    pub fn new(place: Place, signs: &[i8]) -> Result<Self> {
        let n = match place {
            Place::Infinite => 1,
            Place::Finite(2) => 3,
            Place::Finite(_) => 2,
        };
        if signs.len() != n || signs.iter().any(|&s| s != 1 && s != -1) {
            return invalid(format!("character at {place} needs {n} signs in {{+1,-1}}"));
        }
        let mut arr = [1i8; 3];
        arr[..n].copy_from_slice(signs);
        Ok(LocalQuadChar { place, signs: arr })
    }

    pub fn trivial(place: Place) -> Self {
        LocalQuadChar { place, signs: [1; 3] }
    }

    pub fn sign_character() -> Self {
        LocalQuadChar { place: Place::Infinite, signs: [-1, 1, 1] }
    }

    pub fn place(&self) -> Place {
        self.place
    }

    pub fn signs(&self) -> &[i8] {
        match self.place {
            Place::Infinite => &self.signs[..1],
            Place::Finite(2) => &self.signs[..3],
            Place::Finite(_) => &self.signs[..2],
        }
    }

    /// All characters at the place, trivial one first, in a fixed order.
    pub fn all(place: Place) -> Vec<Self> {
        let n = match place {
            Place::Infinite => 1,
            Place::Finite(2) => 3,
            Place::Finite(_) => 2,
        };
        (0..(1u32 << n))
            .map(|mask| {
                let signs: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                LocalQuadChar::new(place, &signs).expect("valid signs")
            })
            .collect()
    }

    /// The character x ↦ (δ, x)_v.
    pub fn from_class(delta: i64, place: Place) -> Self {
        let gens: Vec<i128> = match place {
            Place::Infinite => vec![-1],
            Place::Finite(2) => vec![-1, 5, 2],
            Place::Finite(p) => vec![smallest_nonresidue(p) as i128, p as i128],
        };
        let signs: Vec<i8> = gens.iter().map(|&g| hilbert_symbol_int(delta as i128, g, place)).collect();
        LocalQuadChar::new(place, &signs).expect("hilbert values are signs")
    }

    pub fn is_trivial(&self) -> bool {
        self.signs().iter().all(|&s| s == 1)
    }

    /// Exponent f of the conductor p^f (0 at ∞).
    pub fn conductor_exponent(&self) -> u32 {
        match self.place {
            Place::Infinite => 0,
            Place::Finite(2) => {
                if self.signs[1] == -1 {
                    3
                } else if self.signs[0] == -1 {
                    2
                } else {
                    0
                }
            }
            Place::Finite(_) => {
                if self.signs[0] == -1 {
                    1
                } else {
                    0
                }
            }
        }
    }

    pub fn is_ramified(&self) -> bool {
        self.conductor_exponent() > 0
    }

    /// N(𝔣) = p^f.
    pub fn conductor_norm(&self) -> u64 {
        match self.place {
            Place::Infinite => 1,
            Place::Finite(p) => p.pow(self.conductor_exponent()),
        }
    }

    /// Value on the uniformizer p (finite places); meaningful as χ(p) even when ramified.
    pub fn value_at_p(&self) -> i8 {
        match self.place {
            Place::Infinite => 1,
            Place::Finite(2) => self.signs[2],
            Place::Finite(_) => self.signs[1],
        }
    }

    /// δ = 0 for the trivial and 1 for the sign character at ∞.
    pub fn delta_bit(&self) -> u8 {
        if self.place == Place::Infinite && self.signs[0] == -1 {
            1
        } else {
            0
        }
    }

    /// Value on a nonzero integer.
    pub fn eval(&self, x: i128) -> i8 {
        assert!(x != 0);
        match self.place {
            Place::Infinite => {
                if x < 0 {
                    self.signs[0]
                } else {
                    1
                }
            }
            Place::Finite(2) => {
                let k = valuation(x, 2);
                let w = (x >> k).rem_euclid(8);
                let unit = match w {
                    1 => 1,
                    3 => self.signs[0] * self.signs[1],
                    5 => self.signs[1],
                    7 => self.signs[0],
                    _ => unreachable!(),
                };
                if k % 2 == 1 {
                    unit * self.signs[2]
                } else {
                    unit
                }
            }
            Place::Finite(p) => {
                let k = valuation(x, p);
                let mut w = x;
                for _ in 0..k {
                    w /= p as i128;
                }
                let mut r = if kronecker_pos(w.rem_euclid(p as i128) as i64, p) == -1 { self.signs[0] } else { 1 };
                if k % 2 == 1 {
                    r *= self.signs[1];
                }
                r
            }
        }
    }

    /// Value on a nonzero rational n/d.
    pub fn eval_rational(&self, n: i64, d: i64) -> i8 {
        self.eval(n as i128 * d as i128)
    }

    pub fn mul(&self, other: &LocalQuadChar) -> LocalQuadChar {
        assert_eq!(self.place, other.place);
        let mut signs = [1i8; 3];
        for (i, s) in signs.iter_mut().enumerate() {
            *s = self.signs[i] * other.signs[i];
        }
        LocalQuadChar { place: self.place, signs }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (place, rest) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("character '{text}' lacks ':'")))?;
        let place = match place.trim() {
            "inf" | "oo" | "∞" => Place::Infinite,
            p => {
                let p: u64 = p.parse().map_err(|_| Error::InvalidInput(format!("bad place '{p}'")))?;
                Place::finite(p)?
            }
        };
        let signs: Result<Vec<i8>> = rest
            .split_whitespace()
            .map(|t| match t {
                "+" | "+1" | "1" => Ok(1),
                "-" | "-1" => Ok(-1),
                _ => invalid(format!("bad sign '{t}'")),
            })
            .collect();
        LocalQuadChar::new(place, &signs?)
    }
}

impl fmt::Display for LocalQuadChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let signs: Vec<&str> = self.signs().iter().map(|&s| if s == 1 { "+" } else { "-" }).collect();
        write!(f, "{}:{}", self.place, signs.join(" "))
    }
}

/// A character ω_S of Q_S^×/(Q_S^×)², stored place by place.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct OmegaS {
    comps: BTreeMap<Place, LocalQuadChar>,
}

impl OmegaS {
    pub fn new(components: impl IntoIterator<Item = LocalQuadChar>) -> Result<Self> {
        let mut comps = BTreeMap::new();
        for c in components {
            if comps.insert(c.place(), c).is_some() {
                return invalid(format!("place {} listed twice", c.place()));
            }
        }
        if !comps.contains_key(&Place::Infinite) {
            return invalid("ω_S must have a component at ∞");
        }
        Ok(OmegaS { comps })
    }

    pub fn trivial(places: &[Place]) -> Result<Self> {
        OmegaS::new(places.iter().map(|&p| LocalQuadChar::trivial(p)))
    }

    /// Parses "inf:+;2:+ - +;3:- +".
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Result<Vec<LocalQuadChar>> =
            text.split(';').filter(|t| !t.trim().is_empty()).map(|t| LocalQuadChar::parse(t.trim())).collect();
        OmegaS::new(parts?)
    }

    pub fn places(&self) -> Vec<Place> {
        self.comps.keys().copied().collect()
    }

    pub fn finite_primes(&self) -> Vec<u64> {
        self.comps.keys().filter_map(|p| p.prime()).collect()
    }

    pub fn component(&self, v: Place) -> Option<&LocalQuadChar> {
        self.comps.get(&v)
    }

    pub fn components(&self) -> impl Iterator<Item = &LocalQuadChar> {
        self.comps.values()
    }

    pub fn infinite(&self) -> &LocalQuadChar {
        &self.comps[&Place::Infinite]
    }

    pub fn is_trivial(&self) -> bool {
        self.comps.values().all(|c| c.is_trivial())
    }

    /// True when χ_{D,v} = ω_v at every v ∈ S.
    pub fn matches(&self, chi: &QuadraticCharacter) -> bool {
        self.comps.iter().all(|(&v, c)| chi.local_component(v) == *c)
    }

    /// The local components of χ restricted to S.
    pub fn of_character(chi: &QuadraticCharacter, places: &[Place]) -> Self {
        OmegaS { comps: places.iter().map(|&v| (v, chi.local_component(v))).collect() }
    }

    /// Value ω_S(δ_S) for a vector of integer representatives, one per place in order.
    pub fn eval(&self, delta: &[i64]) -> i8 {
        assert_eq!(delta.len(), self.comps.len());
        self.comps.values().zip(delta).map(|(c, &d)| c.eval(d as i128)).product()
    }

    /// Every character of Q_S^×/(Q_S^×)² for S = `places`.
    pub fn all(places: &[Place]) -> Vec<OmegaS> {
        let mut out = vec![BTreeMap::new()];
        for &v in places {
            let mut next = Vec::new();
            for partial in &out {
                for c in LocalQuadChar::all(v) {
                    let mut m: BTreeMap<Place, LocalQuadChar> = partial.clone();
                    m.insert(v, c);
                    next.push(m);
                }
            }
            out = next;
        }
        out.into_iter().map(|comps| OmegaS { comps }).collect()
    }

    /// All square-class vectors δ_S (one representative per place).
    pub fn all_classes(places: &[Place]) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for &v in places {
            let mut next = Vec::new();
            for partial in &out {
                for d in v.square_classes() {
                    let mut x: Vec<i64> = partial.clone();
                    x.push(d);
                    next.push(x);
                }
            }
            out = next;
        }
        out
    }
}

impl From<OmegaS> for String {
    fn from(om: OmegaS) -> String {
        om.to_string()
    }
}

impl TryFrom<String> for OmegaS {
    type Error = Error;
    fn try_from(text: String) -> Result<Self> {
        OmegaS::parse(&text)
    }
}

impl fmt::Display for OmegaS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.values().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// A global quadratic character χ_D, D ∈ {1} ∪ {fundamental discriminants}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadraticCharacter {
    d: Discriminant,
}

impl QuadraticCharacter {
    pub fn new(d: Discriminant) -> Self {
        QuadraticCharacter { d }
    }

    pub fn from_int(d: i64) -> Result<Self> {
        Ok(QuadraticCharacter { d: Discriminant::new(d)? })
    }

    pub fn trivial() -> Self {
        QuadraticCharacter { d: Discriminant::one() }
    }

    pub fn discriminant(&self) -> i64 {
        self.d.value()
    }

    pub fn conductor(&self) -> u64 {
        self.d.conductor()
    }

    pub fn is_trivial(&self) -> bool {
        self.d.value() == 1
    }

    pub fn is_even(&self) -> bool {
        self.d.value() > 0
    }

    /// χ_D(n) = (D | n) for n ≥ 1.
    pub fn eval(&self, n: i64) -> i8 {
        assert!(n >= 1);
        kronecker_pos(self.d.value(), n as u64)
    }

    pub fn local_component(&self, v: Place) -> LocalQuadChar {
        LocalQuadChar::from_class(self.d.value(), v)
    }

    /// Conductor with every prime of S removed.
    pub fn conductor_prime_to(&self, places: &[Place]) -> u64 {
        let mut f = self.conductor();
        for p in places.iter().filter_map(|v| v.prime()) {
            while f % p == 0 {
                f /= p;
            }
        }
        f
    }
}

/// ψ_p(x) = exp(-2πi {x}_p) for x = num/den.
fn psi_p(num: i128, den: i128, p: u64) -> Complex64 {
    let frac = p_adic_fraction(num, den, p);
    Complex64::from_polar(1.0, -2.0 * PI * frac)
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    assert_eq!(old_r, 1, "not invertible");
    old_s.rem_euclid(m)
}

/// p-adic fractional part of num/den as a real in [0, 1).
pub fn p_adic_fraction(num: i128, den: i128, p: u64) -> f64 {
    assert!(den != 0);
    if num == 0 {
        return 0.0;
    }
    let pi = p as i128;
    let (mut n, mut d) = (num, den);
    while n % pi == 0 && d % pi == 0 {
        n /= pi;
        d /= pi;
    }
    let e = if d % pi == 0 { valuation(d, p) } else { 0 };
    if e == 0 {
        return 0.0;
    }
    let pe = pi.pow(e);
    let unit = d / pe;
    let r = (n.rem_euclid(pe) * mod_inverse(unit, pe)).rem_euclid(pe);
    r as f64 / pe as f64
}

/// g = N(𝔣)^{-1} Σ_{u mod p^f, p∤u} χ(u) ψ_p(u p^{-f}).
pub fn gauss_sum(chi: &LocalQuadChar) -> Result<Complex64> {
    let p = match chi.place() {
        Place::Infinite => return invalid("gauss sum is defined at finite places only"),
        Place::Finite(p) => p,
    };
    let f = chi.conductor_exponent();
    if f == 0 {
        return invalid("gauss sum requires a ramified character");
    }
    let pf = p.pow(f) as i128;
    let mut acc = Complex64::new(0.0, 0.0);
    for u in 1..pf {
        if u % p as i128 == 0 {
            continue;
        }
        acc += psi_p(u, pf, p) * chi.eval(u) as f64;
    }
    Ok(acc / pf as f64)
}

/// Local gamma factor γ̃_v(s, χ) from the local Tate functional equation.
///
/// Ramified finite places carry χ(p)^f·g·N(𝔣)^s; see `tate_oracle` in the tests.
pub fn tilde_gamma(chi: &LocalQuadChar, s: Complex64) -> Result<Complex64> {
    match chi.place() {
        Place::Infinite => {
            let d = chi.delta_bit() as f64;
            let num_arg = (s + d) / 2.0;
            if is_gamma_pole(num_arg) {
                return Err(Error::Pole(format!("Γ((s+{d})/2) at s={s}")));
            }
            let i_pow = if d == 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
            let pi_pow = Complex64::new(PI, 0.0).powc(Complex64::new(0.5, 0.0) - s);
            Ok(i_pow * pi_pow * gamma(num_arg) * rgamma((Complex64::new(1.0, 0.0) - s + d) / 2.0))
        }
        Place::Finite(p) => {
            let pf = p as f64;
            if chi.is_ramified() {
                let f = chi.conductor_exponent();
                let sign = if f % 2 == 1 { chi.value_at_p() as f64 } else { 1.0 };
                let g = gauss_sum(chi)?;
                Ok(g * sign * Complex64::new(pf.powi(f as i32), 0.0).powc(s))
            } else {
                let c = chi.value_at_p() as f64;
                let p_c = Complex64::new(pf, 0.0);
                let den = Complex64::new(1.0, 0.0) - p_c.powc(-s) * c;
                if den.norm() == 0.0 {
                    return Err(Error::Pole(format!("local factor at p={p}, s={s}")));
                }
                Ok((Complex64::new(1.0, 0.0) - p_c.powc(s - 1.0) * c) / den)
            }
        }
    }
}

/// γ_v(s, u) = Σ_χ χ(u) γ̃_v(s, χ).
pub fn gamma_sum(u: i64, v: Place, s: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for chi in LocalQuadChar::all(v) {
        acc += tilde_gamma(&chi, s)? * chi.eval(u as i128) as f64;
    }
    Ok(acc)
}

/// ∫_{Z_p} ψ_p(c x²) dx for c = num/den, as an exact finite residue sum.
fn quadratic_phase_integral(num: i128, den: i128, p: u64, guard: u32) -> Complex64 {
    let pi = p as i128;
    let mut vc: i64 = 0;
    let (mut n, mut d) = (num, den);
    while n % pi == 0 {
        n /= pi;
        vc += 1;
    }
    while d % pi == 0 {
        d /= pi;
        vc -= 1;
    }
    let shift = (-vc).max(0) as u32;
    let m = 2 * shift + guard;
    let pm = pi.pow(m);
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..pm {
        acc += psi_p(num * x * x, den, p);
    }
    acc / pm as f64
}

/// Weil constant α_ψ(a) solving ∫φ ψ(ax²) = α(a)|2a|^{-1/2} ∫ φ̂ ψ(-x²/(4a)) with φ = 1_{Z_p}.
pub fn weil_constant(a: i64, v: Place) -> Result<Complex64> {
    if a == 0 {
        return invalid("Weil constant needs a ≠ 0");
    }
    match v {
        Place::Infinite => Ok(Complex64::from_polar(1.0, if a > 0 { PI / 4.0 } else { -PI / 4.0 })),
        Place::Finite(p) => {
            let guard = if p == 2 { 5 } else { 1 };
            let lhs = quadratic_phase_integral(a as i128, 1, p, guard);
            let rhs_int = quadratic_phase_integral(-1, 4 * a as i128, p, guard);
            let abs_2a = (p as f64).powi(-(valuation(2 * a as i128, p) as i32));
            Ok(lhs / (rhs_int * abs_2a.powf(-0.5)))
        }
    }
}

/// Γ_S(s, ω_S) for F = Q.
pub fn gamma_cap_s(omega: &OmegaS, s: Complex64) -> Result<Complex64> {
    if is_gamma_pole(s) {
        return Err(Error::Pole(format!("Γ(s) at s={s}")));
    }
    let one = Complex64::new(1.0, 0.0);
    let trig = if omega.infinite().is_trivial() { cos_pi(s / 2.0) } else { sin_pi(s / 2.0) };
    let mut r = trig * 2.0 * Complex64::new(2.0 * PI, 0.0).powc(-s) * gamma(s);
    for c in omega.components() {
        let p = match c.place() {
            Place::Infinite => continue,
            Place::Finite(p) => p as f64,
        };
        let pc = Complex64::new(p, 0.0);
        if c.is_ramified() {
            r *= Complex64::new(c.conductor_norm() as f64, 0.0).powc(s - 0.5);
        } else {
            let w = c.value_at_p() as f64;
            let den = one - pc.powc(-s) * w;
            if den.norm() == 0.0 {
                return Err(Error::Pole(format!("local factor at p={p}")));
            }
            r *= (one - pc.powc(s - 1.0) * w) / den;
        }
    }
    Ok(r)
}

/// A matrix of local FE coefficients with its row and column labels.
#[derive(Clone, Debug)]
pub struct LocalMatrix<R, C> {
    pub rows: Vec<R>,
    pub cols: Vec<C>,
    pub entries: Vec<Vec<Complex64>>,
}

impl<R: PartialEq, C: PartialEq> LocalMatrix<R, C> {
    pub fn get(&self, r: &R, c: &C) -> Complex64 {
        let i = self.rows.iter().position(|x| x == r).expect("row label");
        let j = self.cols.iter().position(|x| x == c).expect("column label");
        self.entries[i][j]
    }
}

/// G̃_v(s, χ, ω), rows indexed by χ and columns by ω.
pub fn g_tilde_matrix(s1: Complex64, s2: Complex64, v: Place) -> Result<LocalMatrix<LocalQuadChar, LocalQuadChar>> {
    let chars = LocalQuadChar::all(v);
    let classes = v.square_classes();
    let n = classes.len() as f64;
    let pref = v.abs_two().powf(-0.5) / n;
    let sp = s1 + s2 - 0.5;
    let alphas: Vec<Complex64> = classes.iter().map(|&eta| weil_constant(-eta, v)).collect::<Result<_>>()?;
    let g2: Vec<Complex64> = chars.iter().map(|c| tilde_gamma(c, s2)).collect::<Result<_>>()?;
    let gp: Vec<Complex64> = chars.iter().map(|c| tilde_gamma(c, sp)).collect::<Result<_>>()?;
    let mut entries = vec![vec![Complex64::new(0.0, 0.0); chars.len()]; chars.len()];
    for (i, chi) in chars.iter().enumerate() {
        for (j, om) in chars.iter().enumerate() {
            let prod = chi.mul(om);
            let mut sum = Complex64::new(0.0, 0.0);
            for (k, &eta) in classes.iter().enumerate() {
                sum += alphas[k] * prod.eval(eta as i128) as f64;
            }
            entries[i][j] = g2[i] * gp[j] * sum * pref;
        }
    }
    Ok(LocalMatrix { rows: chars.clone(), cols: chars, entries })
}

/// G_v(s, δ, ξ), rows indexed by δ and columns by ξ (square-class representatives).
pub fn g_matrix(s1: Complex64, s2: Complex64, v: Place) -> Result<LocalMatrix<i64, i64>> {
    let classes = v.square_classes();
    let n = classes.len() as f64;
    let pref = v.abs_two().powf(-0.5) / (n * n);
    let sp = s1 + s2 - 0.5;
    let mut entries = vec![vec![Complex64::new(0.0, 0.0); classes.len()]; classes.len()];
    for (i, &delta) in classes.iter().enumerate() {
        for (j, &xi) in classes.iter().enumerate() {
            let mut sum = Complex64::new(0.0, 0.0);
            for &eta in &classes {
                let a = weil_constant(-eta, v)?;
                let de = v.class_of(delta as i128 * eta as i128);
                let ex = v.class_of(eta as i128 * xi as i128);
                sum += a * gamma_sum(de, v, s2)? * gamma_sum(ex, v, sp)?;
            }
            entries[i][j] = sum * pref;
        }
    }
    Ok(LocalMatrix { rows: classes.clone(), cols: classes, entries })
}

fn arch_common(s1: Complex64, s2: Complex64, two_shift: f64) -> Complex64 {
    let e = s1 + s2 * 2.0;
    Complex64::new(2.0, 0.0).powc(-e + two_shift)
        * Complex64::new(PI, 0.0).powc(-e + 0.5)
        * gamma(s2)
        * gamma(s1 + s2 - 0.5)
}

/// Closed form of G̃_∞ (rows χ = 1, sgn; columns ω = 1, sgn).
pub fn g_tilde_infinity_closed(s1: Complex64, s2: Complex64) -> [[Complex64; 2]; 2] {
    let c = arch_common(s1, s2, 1.5);
    let sp = s1 + s2 - 0.5;
    let (c2, s2t) = (cos_pi(s2 / 2.0), sin_pi(s2 / 2.0));
    let (cp, spt) = (cos_pi(sp / 2.0), sin_pi(sp / 2.0));
    [[c * c2 * cp, c * c2 * spt], [c * s2t * cp, -(c * s2t * spt)]]
}

/// Closed form of G_∞ (rows δ = +1, -1; columns ξ = +1, -1).
pub fn g_infinity_closed(s1: Complex64, s2: Complex64) -> [[Complex64; 2]; 2] {
    let c = arch_common(s1, s2, 1.0);
    let a = sin_pi(s1 / 2.0 + s2);
    let b = cos_pi(s1 / 2.0);
    let d = sin_pi(s1 / 2.0);
    let e = cos_pi(s1 / 2.0 + s2);
    [[c * a, c * b], [c * d, c * e]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn local_component_examples() {
        let one = QuadraticCharacter::trivial();
        for v in [Place::Infinite, Place::Finite(2), Place::Finite(3), Place::Finite(5)] {
            assert!(one.local_component(v).is_trivial());
        }
        let five = QuadraticCharacter::from_int(5).unwrap();
        assert!(five.local_component(Place::Infinite).is_trivial());
        let m4 = QuadraticCharacter::from_int(-4).unwrap().local_component(Place::Finite(2));
        assert_eq!(m4.signs(), &[-1, 1, 1]);
        assert_eq!(m4.conductor_exponent(), 2);
        let m8 = QuadraticCharacter::from_int(-8).unwrap().local_component(Place::Finite(2));
        assert_eq!(m8.conductor_exponent(), 3);
    }

    #[test]
    fn local_component_is_hilbert_symbol() {
        for d in [-8i64, -7, -4, -3, 5, 8, 12, -15, 21, 24, -24, 40] {
            let chi = QuadraticCharacter::from_int(d).unwrap();
            for v in [Place::Infinite, Place::Finite(2), Place::Finite(3), Place::Finite(5), Place::Finite(7)] {
                let lc = chi.local_component(v);
                for x in -60i128..=60 {
                    if x == 0 {
                        continue;
                    }
                    assert_eq!(lc.eval(x), hilbert_symbol_int(d as i128, x, v), "D={d} v={v} x={x}");
                }
            }
        }
    }

    #[test]
    fn local_component_multiplicative() {
        let pairs = [(-4i64, 5i64), (-3, -4), (5, -8), (-7, 8), (5, 13), (-3, 5)];
        for (a, b) in pairs {
            let ab = a * b;
            if !crate::arith::is_fundamental_discriminant(ab) {
                continue;
            }
            let (ca, cb, cab) = (
                QuadraticCharacter::from_int(a).unwrap(),
                QuadraticCharacter::from_int(b).unwrap(),
                QuadraticCharacter::from_int(ab).unwrap(),
            );
            for v in [Place::Infinite, Place::Finite(2), Place::Finite(3), Place::Finite(5), Place::Finite(13)] {
                for x in 1i128..40 {
                    assert_eq!(cab.local_component(v).eval(x), ca.local_component(v).eval(x) * cb.local_component(v).eval(x));
                }
            }
        }
    }

    #[test]
    fn product_of_local_components_is_trivial_on_rationals() {
        for d in [-8i64, -4, -3, 5, 12, -15, 21] {
            let chi = QuadraticCharacter::from_int(d).unwrap();
            for x in [-30i128, -7, -2, 2, 3, 6, 10, 35] {
                let mut prod = chi.local_component(Place::Infinite).eval(x);
                for p in [2u64, 3, 5, 7] {
                    prod *= chi.local_component(Place::Finite(p)).eval(x);
                }
                assert_eq!(prod, 1, "D={d} x={x}");
            }
        }
    }

    #[test]
    fn conductor_prime_to_s() {
        let s = [Place::Infinite, Place::Finite(2)];
        assert_eq!(QuadraticCharacter::from_int(5).unwrap().conductor_prime_to(&[Place::Infinite]), 5);
        assert_eq!(QuadraticCharacter::from_int(-8).unwrap().conductor_prime_to(&s), 1);
        assert_eq!(QuadraticCharacter::from_int(12).unwrap().conductor_prime_to(&s), 3);
    }

    #[test]
    fn gauss_sum_values() {
        let five = LocalQuadChar::new(Place::Finite(5), &[-1, 1]).unwrap();
        let g = gauss_sum(&five).unwrap();
        assert!((g - c(5f64.powf(-0.5))).norm() < 1e-14);
        for p in (3..50u64).filter(|&p| is_prime(p)).chain([2]) {
            for chi in LocalQuadChar::all(Place::Finite(p)).into_iter().filter(|c| c.is_ramified()) {
                let g = gauss_sum(&chi).unwrap();
                let expect = (chi.conductor_norm() as f64).powf(-0.5);
                assert!((g.norm() - expect).abs() < 1e-12, "p={p} {chi}");
            }
        }
        assert!(gauss_sum(&LocalQuadChar::trivial(Place::Finite(3))).is_err());
        assert!(gauss_sum(&LocalQuadChar::trivial(Place::Infinite)).is_err());
    }

    #[test]
    fn tilde_gamma_examples() {
        let t = LocalQuadChar::trivial(Place::Finite(3));
        assert!((tilde_gamma(&t, c(2.0)).unwrap() - c(-9.0 / 4.0)).norm() < 1e-13);
        let inf = LocalQuadChar::trivial(Place::Infinite);
        assert!((tilde_gamma(&inf, c(0.5)).unwrap() - c(1.0)).norm() < 1e-14);
        let s = Complex64::new(0.3, 0.2);
        let expect = Complex64::new(PI, 0.0).powc(c(0.5) - s) * gamma(s / 2.0) / gamma((c(1.0) - s) / 2.0);
        assert!((tilde_gamma(&inf, s).unwrap() - expect).norm() < 1e-13);
        assert!(tilde_gamma(&inf, c(-2.0)).is_err());
    }

    /// Both sides of ζ(φ̂, s, χ) = γ̃(s, χ) ζ(φ, 1-s, χ) by residue sums, φ = 1_{u0 + p^f Z_p}.
    fn tate_oracle(chi: &LocalQuadChar, u0: i128, s: Complex64) -> (Complex64, Complex64) {
        let p = chi.place().prime().unwrap();
        let pf = p as f64;
        let f = chi.conductor_exponent().max(1);
        let pfi = (p as i128).pow(f);
        let unit_vol = 1.0 / (1.0 - 1.0 / pf);
        // ζ(φ, 1-s): φ is supported on units.
        let rhs_zeta = Complex64::new(chi.eval(u0) as f64 * unit_vol * pf.powi(-(f as i32)), 0.0);
        // ζ(φ̂, s), φ̂(y) = p^{-f} ψ(u0 y) 1_{p^{-f}Z_p}(y).
        let mut lhs = Complex64::new(0.0, 0.0);
        for k in -(f as i32)..=0 {
            let mut inner = Complex64::new(0.0, 0.0);
            for w in 0..pfi {
                if w % p as i128 == 0 {
                    continue;
                }
                let (num, den) = if k < 0 { (u0 * w, (p as i128).pow((-k) as u32)) } else { (0, 1) };
                inner += psi_p(num, den, p) * chi.eval(w) as f64;
            }
            let measure = unit_vol / pfi as f64;
            let yk = Complex64::new(pf, 0.0).powc(-s * k as f64) * (chi.value_at_p() as f64).powi(k.abs());
            lhs += yk * inner * measure * pf.powi(-(f as i32));
        }
        if !chi.is_ramified() {
            // k ≥ 1 terms: ψ ≡ 1 and the unit integral is 1, a geometric series.
            let r = Complex64::new(pf, 0.0).powc(-s) * chi.value_at_p() as f64;
            lhs += r / (Complex64::new(1.0, 0.0) - r) * pf.powi(-(f as i32));
        }
        (lhs, rhs_zeta)
    }

    #[test]
    fn tate_functional_equation_oracle() {
        let pts = [
            Complex64::new(0.2, 0.0),
            Complex64::new(0.35, 0.7),
            Complex64::new(0.5, -1.3),
            Complex64::new(0.71, 0.1),
            Complex64::new(0.9, 2.0),
        ];
        for p in [2u64, 3, 5, 7] {
            for chi in LocalQuadChar::all(Place::Finite(p)) {
                for u0 in [1i128, 3, 7] {
                    if u0 % p as i128 == 0 {
                        continue;
                    }
                    for &s in &pts {
                        let (lhs, z) = tate_oracle(&chi, u0, s);
                        let rhs = tilde_gamma(&chi, s).unwrap() * z;
                        assert!((lhs - rhs).norm() < 1e-10, "p={p} {chi} u0={u0} s={s}: {lhs} vs {rhs}");
                    }
                }
            }
        }
    }

    #[test]
    fn tate_oracle_with_coarse_indicator_is_degenerate() {
        // φ = 1_{p^{-1}Z_p}: for ramified χ both sides vanish identically.
        for p in [3u64, 5] {
            let chi = LocalQuadChar::new(Place::Finite(p), &[-1, 1]).unwrap();
            let mut acc = Complex64::new(0.0, 0.0);
            for u in 1..p as i128 {
                acc += Complex64::new(chi.eval(u) as f64, 0.0);
            }
            assert!(acc.norm() < 1e-14);
        }
    }

    #[test]
    fn gamma_sum_real_place() {
        for &s in &[Complex64::new(0.3, 0.0), Complex64::new(1.7, 0.4), Complex64::new(2.5, -0.3)] {
            let base = Complex64::new(2.0 * PI, 0.0).powc(-s) * gamma(s) * 2.0;
            let plus = base * (Complex64::new(0.0, PI / 2.0) * s).exp();
            let minus = base * (Complex64::new(0.0, -PI / 2.0) * s).exp();
            assert!((gamma_sum(1, Place::Infinite, s).unwrap() - plus).norm() < 1e-12);
            assert!((gamma_sum(-1, Place::Infinite, s).unwrap() - minus).norm() < 1e-12);
        }
    }

    #[test]
    fn weil_constants() {
        assert!((weil_constant(1, Place::Infinite).unwrap() - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        assert!((weil_constant(-1, Place::Infinite).unwrap() - Complex64::from_polar(1.0, -PI / 4.0)).norm() < 1e-15);
        for v in [Place::Finite(2), Place::Finite(3), Place::Finite(5), Place::Finite(7)] {
            for a in v.square_classes() {
                let w = weil_constant(a, v).unwrap();
                assert!((w.norm() - 1.0).abs() < 1e-12, "v={v} a={a}: {w}");
                let w8 = w.powi(8);
                assert!((w8 - 1.0).norm() < 1e-10, "eighth root of unity");
            }
        }
        // Product formula over places for a = 1, -1, 2, 3, 5.
        for a in [1i64, -1, 2, -2, 3, 5, -5, 10] {
            let mut prod = weil_constant(a, Place::Infinite).unwrap();
            for p in [2u64, 3, 5, 7] {
                let v = Place::Finite(p);
                prod *= weil_constant(v.class_of(a as i128), v).unwrap();
            }
            assert!((prod - 1.0).norm() < 1e-10, "a={a}: {prod}");
        }
        // Guard refinement leaves dyadic values unchanged.
        for a in Place::Finite(2).square_classes() {
            let coarse = quadratic_phase_integral(-1, 4 * a as i128, 2, 5);
            let fine = quadratic_phase_integral(-1, 4 * a as i128, 2, 8);
            assert!((coarse - fine).norm() < 1e-12);
        }
    }

    #[test]
    fn gamma_cap_examples() {
        let triv = OmegaS::parse("inf:+").unwrap();
        assert!((gamma_cap_s(&triv, c(0.5)).unwrap() - c(1.0)).norm() < 1e-14);
        let s = Complex64::new(1.3, 0.2);
        let base = Complex64::new(2.0 * PI, 0.0).powc(-s) * gamma(s) * 2.0;
        assert!((gamma_cap_s(&triv, s).unwrap() - base * cos_pi(s / 2.0)).norm() < 1e-13);
        let sgn = OmegaS::parse("inf:-").unwrap();
        assert!((gamma_cap_s(&sgn, s).unwrap() - base * sin_pi(s / 2.0)).norm() < 1e-13);
    }

    #[test]
    fn omega_parse_roundtrip() {
        let w = OmegaS::parse("inf:-;2:+ - +;3:- +").unwrap();
        assert_eq!(w.to_string(), "inf:-;2:+ - +;3:- +");
        assert_eq!(OmegaS::parse(&w.to_string()).unwrap(), w);
        assert!(OmegaS::parse("2:+ + +").is_err());
        assert!(OmegaS::parse("inf:+;4:+ +").is_err());
        assert!(OmegaS::parse("inf:+;3:+").is_err());
        assert_eq!(OmegaS::all(&[Place::Infinite, Place::Finite(2)]).len(), 16);
    }

    #[test]
    fn class_of_canonical() {
        let v = Place::Finite(2);
        assert_eq!(v.class_of(3), -5);
        assert_eq!(v.class_of(12), -5);
        assert_eq!(v.class_of(-8), -2);
        assert_eq!(v.class_of(40), 10);
        let w = Place::Finite(3);
        assert_eq!(w.class_of(2), 2);
        assert_eq!(w.class_of(18), 2);
        assert_eq!(w.class_of(-3), 6);
    }

    #[test]
    fn g_tilde_infinity_matches_closed_form() {
        let pts = [(0.3, 0.5), (1.2, 0.7), (0.9, 1.6), (1.7, 0.25), (0.45, 1.9)];
        for &(a, b) in &pts {
            let (s1, s2) = (Complex64::new(a, 0.1), Complex64::new(b, -0.2));
            let m = g_tilde_matrix(s1, s2, Place::Infinite).unwrap();
            let closed = g_tilde_infinity_closed(s1, s2);
            for i in 0..2 {
                for j in 0..2 {
                    let d = (m.entries[i][j] - closed[i][j]).norm();
                    assert!(d < 1e-10 * (1.0 + closed[i][j].norm()), "({i},{j}) at {s1},{s2}");
                }
            }
            let g = g_matrix(s1, s2, Place::Infinite).unwrap();
            let gc = g_infinity_closed(s1, s2);
            for i in 0..2 {
                for j in 0..2 {
                    let d = (g.entries[i][j] - gc[i][j]).norm();
                    assert!(d < 1e-10 * (1.0 + gc[i][j].norm()), "G ({i},{j}) at {s1},{s2}");
                }
            }
        }
    }
}
