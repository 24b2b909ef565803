//! Fixed values from independent oracles: brute force, finite sums, exact Bernoulli numbers.

use num_complex::Complex64;
use shintani::arith::{
    enumerate_discriminants, generalized_bernoulli, hilbert_symbol_int, is_fundamental_discriminant, kronecker, mobius, sigma_k,
};
use shintani::characters::{gamma_cap_s, gauss_sum, tilde_gamma, weil_constant, LocalQuadChar, OmegaS, Place, QuadraticCharacter};
use shintani::congruence::{count_roots, xi_direct, XiVariant};
use shintani::double_zeta::enumerate_chars;
use shintani::lfun::{l_nonpositive_exact, l_value, zeta_partial, ComplexPair, EvalConfig};
use shintani::local_zeta::verify_b_function;
use shintani::poly::rat;
use std::f64::consts::PI;

const INF: Place = Place::Infinite;

fn chi(d: i64) -> QuadraticCharacter {
    QuadraticCharacter::from_int(d).unwrap()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn symbols() {
    assert_eq!(kronecker(2, 7).unwrap(), 1);
    assert_eq!(hilbert_symbol_int(-1, -1, INF), -1);
    assert_eq!(hilbert_symbol_int(-1, -1, Place::Finite(2)), -1);
    assert!(is_fundamental_discriminant(5));
    assert!(is_fundamental_discriminant(-4));
    assert!(!is_fundamental_discriminant(4));
    assert_eq!(sigma_k(4, 0), 3.into());
    assert_eq!(mobius(6), 1);
}

#[test]
fn discriminants_up_to_eight() {
    let mut all: Vec<i64> = enumerate_discriminants(8, None).iter().map(|d| d.value()).collect();
    all.sort();
    assert_eq!(all, vec![-8, -7, -4, -3, 1, 5, 8]);
    let sgn = OmegaS::parse("inf:-").unwrap();
    let mut neg: Vec<i64> = enumerate_discriminants(8, Some(&sgn)).iter().map(|d| d.value()).collect();
    neg.sort();
    assert_eq!(neg, vec![-8, -7, -4, -3]);
    let triv = OmegaS::parse("inf:+").unwrap();
    let mut pos: Vec<i64> = enumerate_chars(&triv, 8).unwrap().members.iter().map(|c| c.discriminant()).collect();
    pos.sort();
    assert_eq!(pos, vec![1, 5, 8]);
}

#[test]
fn generalized_bernoulli_numbers() {
    assert_eq!(generalized_bernoulli(1, &chi(-4)), rat(-1, 2));
    assert_eq!(generalized_bernoulli(2, &chi(5)), rat(4, 5));
    assert_eq!(l_nonpositive_exact(2, &chi(5)).unwrap(), rat(-2, 5));
    assert_eq!(l_nonpositive_exact(1, &chi(-4)).unwrap(), rat(1, 2));
}

#[test]
fn local_components() {
    let two = Place::Finite(2);
    let c4 = chi(-4).local_component(two);
    assert_eq!([c4.eval(-1), c4.eval(5), c4.eval(2)], [-1, 1, 1]);
    assert!(chi(5).local_component(INF).is_trivial());
    assert_eq!(chi(-8).conductor_prime_to(&[INF, two]), 1);
    assert_eq!(chi(12).conductor_prime_to(&[INF, two]), 3);
}

#[test]
fn gauss_sums_and_gamma_factors() {
    for p in [3u64, 5] {
        for ch in LocalQuadChar::all(Place::Finite(p)).into_iter().filter(|c| c.is_ramified()) {
            let g = gauss_sum(&ch).unwrap();
            assert!((g.norm() - (p as f64).powf(-0.5)).abs() < 1e-13);
            if p == 5 {
                assert!(g.im.abs() < 1e-13);
            }
        }
    }
    let t = tilde_gamma(&LocalQuadChar::trivial(Place::Finite(3)), c(2.0)).unwrap();
    assert!((t - c(-9.0 / 4.0)).norm() < 1e-13);
    let g = gamma_cap_s(&OmegaS::parse("inf:+").unwrap(), c(0.5)).unwrap();
    assert!((g - c(1.0)).norm() < 1e-13);
    let e = Complex64::from_polar(1.0, PI / 4.0);
    assert!((weil_constant(1, INF).unwrap() - e).norm() < 1e-14);
    assert!((weil_constant(-1, INF).unwrap() - e.conj()).norm() < 1e-14);
}

#[test]
fn l_values() {
    let cfg = EvalConfig::default();
    let v = l_value(c(0.0), &chi(-4), &cfg).unwrap();
    assert!((v.value - c(0.5)).norm() < 1e-12);
    let z = zeta_partial(c(2.0), &[INF, Place::Finite(2)], &cfg).unwrap();
    assert!((z.value - c(PI * PI / 8.0)).norm() < 1e-12);
    let z4 = zeta_partial(c(4.0), &[INF], &cfg).unwrap();
    assert!((z4.value - c(PI.powi(4) / 90.0)).norm() < 1e-12);
}

#[test]
fn root_counts_and_first_terms() {
    assert_eq!(count_roots(4, 1), 2);
    assert_eq!(count_roots(9, 0), 3);
    let s = ComplexPair::real(3.0, 3.0);
    assert_eq!(xi_direct(XiVariant::Xi1, s, 1, 1).unwrap().value, c(2.0));
    assert_eq!(xi_direct(XiVariant::Xi2, s, 1, 1).unwrap().value, c(0.0));
    let d = xi_direct(XiVariant::Xi1Star, s, 2000, 2000).unwrap();
    assert!(d.value.re.is_finite() && d.truncation.tail_bound < 1e-4);
}

#[test]
fn b_function_examples() {
    assert!(verify_b_function(0, 1, 2, 2).unwrap());
    assert!(verify_b_function(-1, 2, 3, 1).unwrap());
}
