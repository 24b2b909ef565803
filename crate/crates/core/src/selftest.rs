//! The acceptance suite: one check per criterion, tolerances pinned here.

use crate::arith::{factorize, hilbert_symbol_int};
use crate::asym::{fit_asymptotic, partial_sum_h};
use crate::characters::{g_infinity_closed, g_matrix, g_tilde_infinity_closed, g_tilde_matrix, gauss_sum, LocalQuadChar, OmegaS, Place, QuadraticCharacter};
use crate::congruence::{count_roots, count_roots_brute, xi_s_infty};
use crate::double_zeta::{
    l_m_coefficient_check, pole_probe, verify_fe1_all, verify_fe2_all, verify_functquad, verify_new_fe, verify_shintani_fe, xi_tilde_all,
};
use crate::error::Result;
use crate::lfun::{ComplexPair, EvalConfig};
use crate::local_zeta::{brute_force_series, closed_form_char, closed_form_delta, default_guard, verify_b_function, Weight};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::collections::BTreeSet;
use std::time::Instant;

pub const EXPLICIT_REL_TAIL: f64 = 1e-3;
pub const FE1_TOL: f64 = 1e-4;
pub const FUNCTQUAD_TOL: f64 = 1e-8;
pub const SHINTANI_TOL: f64 = 1e-4;
pub const FE2_TOL: f64 = 1e-3;
pub const FE2_STAB_TOL: f64 = 1e-4;
pub const GAMMA_CLOSED_TOL: f64 = 1e-10;
pub const LM_TOL: f64 = 1e-5;
pub const ASYM_EXPONENT_MAX: f64 = 0.8;
pub const GAUSS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "explicit formula vs direct series"),
    (2, "local zeta closed forms vs enumeration"),
    (3, "first functional equation"),
    (4, "Shintani and new functional equations"),
    (5, "second functional equation"),
    (6, "archimedean gamma matrices"),
    (7, "Cohen series vs L_m"),
    (8, "root counts vs brute force"),
    (9, "b-function"),
    (10, "pole probes"),
    (11, "central-value average fit"),
    (12, "Hilbert product formula and Gauss sums"),
];

pub fn run(ids: &[u8]) -> Vec<CriterionResult> {
    CRITERIA.iter().filter(|(id, _)| ids.is_empty() || ids.contains(id)).map(|&(id, name)| run_one(id, name)).collect()
}

fn run_one(id: u8, name: &'static str) -> CriterionResult {
    let t = Instant::now();
    let out = match id {
        1 => explicit_formula(),
        2 => local_zeta_oracle(),
        3 => fe1(),
        4 => shintani(),
        5 => fe2(),
        6 => gamma_matrices(),
        7 => cohen_lm(),
        8 => root_counts(),
        9 => b_function_grid(),
        10 => pole_probes(),
        11 => asymptotic(),
        12 => hilbert_gauss(),
        _ => Ok((false, "unknown criterion".into())),
    };
    let (passed, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult { id, name, passed, detail, seconds: t.elapsed().as_secs_f64() }
}

type Outcome = Result<(bool, String)>;

fn rel(res: f64, scale: Complex64) -> f64 {
    res / scale.norm().max(1.0)
}

fn explicit_formula() -> Outcome {
    let cfg = EvalConfig::default();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (a, b) in [(3.0, 3.0), (2.5, 2.5)] {
        let s = ComplexPair::real(a, b);
        let plus = xi_s_infty(1, s, 2000, 2000)?;
        let minus = xi_s_infty(-1, s, 2000, 2000)?;
        for t in xi_tilde_all(s, &[Place::Infinite], 2000, &cfg)? {
            let sign = if t.omega.is_trivial() { 1.0 } else { -1.0 };
            let direct = plus.value + minus.value * sign;
            let budget = plus.truncation.tail_bound + minus.truncation.tail_bound + t.uncertainty();
            let diff = (direct - t.value).norm();
            ok &= diff <= budget && budget <= EXPLICIT_REL_TAIL * direct.norm();
            worst = worst.max(budget / direct.norm());
        }
    }
    Ok((ok, format!("worst tail budget / value = {worst:.2e}")))
}

fn local_zeta_oracle() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for p in [2u64, 3] {
        for chi in LocalQuadChar::all(Place::Finite(p)) {
            let brute = brute_force_series(p, &Weight::Character(chi), 4, default_guard(p))?;
            let closed = closed_form_char(&chi)?.series(4)?;
            if !brute.mismatches(&closed).is_empty() {
                bad.push(format!("{chi}"));
            }
            checked += 1;
        }
    }
    for p in [3u64, 5] {
        for d in Place::Finite(p).square_classes() {
            let brute = brute_force_series(p, &Weight::Class(d), 3, default_guard(p))?;
            let closed = closed_form_delta(p, d)?.series(3)?;
            if !brute.mismatches(&closed).is_empty() {
                bad.push(format!("p={p} δ={d}"));
            }
            checked += 1;
        }
    }
    Ok((bad.is_empty(), format!("{checked} series compared, mismatches: {bad:?}")))
}

fn fe1() -> Outcome {
    let cfg = EvalConfig { target_abs_error: 1e-10, ..Default::default() };
    let points = [
        ComplexPair::real(3.0, 1.5),
        ComplexPair::real(2.5, 1.7),
        ComplexPair::real(3.0, -0.3),
        ComplexPair::real(4.0, 2.5),
        ComplexPair::new(Complex64::new(3.5, 0.5), Complex64::new(0.6, 0.8)),
    ];
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for places in [vec![Place::Infinite], vec![Place::Infinite, Place::Finite(2)]] {
        for &s in &points {
            for r in verify_fe1_all(s, &places, 500, &cfg)? {
                worst = worst.max(rel(r.residual, r.lhs));
                n += 1;
            }
        }
    }
    let mut worst_quad: f64 = 0.0;
    for d in [1i64, 5, -3, -4, 8, -8, 12, -7, 13, -15, 21, -24] {
        let chi = QuadraticCharacter::from_int(d)?;
        for places in [vec![Place::Infinite], vec![Place::Infinite, Place::Finite(2)], vec![Place::Infinite, Place::Finite(3)]] {
            for s in [Complex64::new(0.3, 0.0), Complex64::new(1.4, 0.0), Complex64::new(0.6, 2.0), Complex64::new(-0.7, 1.0)] {
                worst_quad = worst_quad.max(verify_functquad(s, &chi, &places, &cfg)?);
            }
        }
    }
    Ok((
        worst <= FE1_TOL && worst_quad <= FUNCTQUAD_TOL,
        format!("{n} (s, ω_S) checks, worst residual {worst:.2e}; single-character worst {worst_quad:.2e}"),
    ))
}

fn shintani() -> Outcome {
    let cfg = EvalConfig { target_abs_error: 1e-10, ..Default::default() };
    let mut worst: f64 = 0.0;
    for j in [1u8, 2] {
        for (a, b) in [(2.5, 3.0), (1.7, 3.2), (2.3, 2.9)] {
            let r = verify_shintani_fe(j, ComplexPair::real(a, b), 2000, &cfg)?;
            worst = worst.max(rel(r.residual, r.lhs));
        }
    }
    let mut worst_new: f64 = 0.0;
    for k in [0u8, 1] {
        for (a, b) in [(3.0, 1.4), (2.5, 1.7), (3.5, 0.6)] {
            let r = verify_new_fe(k, ComplexPair::real(a, b), 2000, &cfg)?;
            worst_new = worst_new.max(rel(r.residual, r.lhs));
        }
    }
    Ok((
        worst <= SHINTANI_TOL && worst_new <= SHINTANI_TOL,
        format!("variables-interchanged worst {worst:.2e}; new equation worst {worst_new:.2e}"),
    ))
}

fn fe2() -> Outcome {
    let cfg = EvalConfig { target_abs_error: 1e-9, ..Default::default() };
    let places = [Place::Infinite, Place::Finite(2)];
    let (mut worst, mut stab): (f64, f64) = (0.0, 0.0);
    for (a, b) in [(5.0, -1.4), (5.5, -1.8)] {
        for r in verify_fe2_all(ComplexPair::real(a, b), &places, 1000, &cfg)? {
            worst = worst.max(r.residual);
            stab = stab.max(r.stabilization);
        }
    }
    Ok((worst <= FE2_TOL && stab <= FE2_STAB_TOL, format!("16 ω_S × 2 points, worst residual {worst:.2e}, worst X-doubling change {stab:.2e}")))
}

fn gamma_matrices() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let s1 = Complex64::new(rng.gen_range(0.1..2.9), rng.gen_range(-2.0..2.0));
        let s2 = Complex64::new(rng.gen_range(0.1..2.9), rng.gen_range(-2.0..2.0));
        let gt = g_tilde_matrix(s1, s2, Place::Infinite)?;
        let g = g_matrix(s1, s2, Place::Infinite)?;
        let (ct, c) = (g_tilde_infinity_closed(s1, s2), g_infinity_closed(s1, s2));
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((gt.entries[i][j] - ct[i][j]).norm() / (1.0 + ct[i][j].norm()));
                worst = worst.max((g.entries[i][j] - c[i][j]).norm() / (1.0 + c[i][j].norm()));
            }
        }
    }
    Ok((worst <= GAMMA_CLOSED_TOL, format!("10 random points, worst relative difference {worst:.2e}")))
}

fn cohen_lm() -> Outcome {
    let cfg = EvalConfig { target_abs_error: 1e-10, ..Default::default() };
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for places in [vec![Place::Infinite], vec![Place::Infinite, Place::Finite(2)]] {
        for om in OmegaS::all(&places) {
            for (m, s) in [(1u32, 4.0), (3, 4.0), (4, 5.0)] {
                let r = l_m_coefficient_check(m, &om, Complex64::new(s, 0.0), 2000, 2000, &cfg)?;
                worst = worst.max(r.residual);
                n += 1;
            }
        }
    }
    Ok((worst <= LM_TOL, format!("{n} (m, s, ω_S) checks, worst residual {worst:.2e}")))
}

fn root_counts() -> Outcome {
    let mut bad = 0;
    for m in 1..=300u64 {
        for n in -300..=300i64 {
            bad += usize::from(count_roots(m, n) != count_roots_brute(m, n));
        }
    }
    Ok((bad == 0, format!("300 × 601 pairs, {bad} mismatches")))
}

fn b_function_grid() -> Outcome {
    let mut total = 0;
    let mut bad = Vec::new();
    for m1 in -2i64..=0 {
        for sum in 0i64..=3 {
            let m2 = sum - m1;
            for s1 in 2..=5 {
                for s2 in 2..=5 {
                    total += 1;
                    if !verify_b_function(m1, m2, s1, s2)? {
                        bad.push((m1, m2, s1, s2));
                    }
                }
            }
        }
    }
    Ok((bad.is_empty(), format!("{total} grid points, failures {bad:?}")))
}

fn pole_probes() -> Outcome {
    let cfg = EvalConfig { target_abs_error: 1e-10, ..Default::default() };
    let mut ok = true;
    let mut notes = Vec::new();
    for (m, om) in [(1u32, "inf:+"), (1, "inf:-"), (3, "inf:+"), (3, "inf:-")] {
        let om = OmegaS::parse(om)?;
        let p = pole_probe(m, &om, 8, 5000, &cfg)?;
        // differences[i] is between k = i+1 and k = i+2
        let ratios: Vec<f64> = p.differences.windows(2).skip(3).map(|w| w[0] / w[1]).collect();
        let good = ratios.iter().all(|&r| r >= 2.0);
        ok &= good;
        notes.push(format!("m={m} {om}: ratios {}", ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(",")));
    }
    Ok((ok, notes.join("; ")))
}

fn asymptotic() -> Outcome {
    let cfg = EvalConfig { target_abs_error: 1e-10, ..Default::default() };
    let om = OmegaS::parse("inf:-;2:+ + +")?;
    let series = partial_sum_h(100_000, &om, &cfg)?;
    let fit = fit_asymptotic(&series)?;
    let last: Vec<f64> = series.checkpoints.iter().rev().take(5).rev().map(|&(x, y)| y / (x * x.ln())).collect();
    let monotone = last.windows(2).all(|w| w[1] >= w[0]) || last.windows(2).all(|w| w[1] <= w[0]);
    let ok = fit.a.is_finite() && fit.b.is_finite() && fit.exponent_estimate < ASYM_EXPONENT_MAX && monotone;
    Ok((
        ok,
        format!(
            "A = {:.6}, B = {:.6}, exponent {:.3} (residual slope {:.3}, power fit {}), ratio trend {}, {} terms ({} negative), numeric error {:.1e}",
            fit.a,
            fit.b,
            fit.exponent_estimate,
            fit.slope_exponent,
            fit.power_exponent.map_or("at theta -> 1".to_string(), |t| format!("{t:.3}")),
            last.iter().map(|r| format!("{r:.5}")).collect::<Vec<_>>().join(","),
            series.terms,
            series.negative_terms,
            series.numeric_error
        ),
    ))
}

/// Signed squarefree kernel of a nonzero integer.
fn kernel(n: i64) -> i64 {
    let f = factorize(n.unsigned_abs());
    let k: u64 = f.factors.iter().filter(|(_, e)| e % 2 == 1).map(|(p, _)| *p).product();
    n.signum() * k as i64
}

fn hilbert_gauss() -> Outcome {
    // a/b ≡ ab modulo squares, so the classes of all n/d with |n|, d < 100 are the kernels of n·d.
    let mut classes = BTreeSet::new();
    for n in 1..100i64 {
        for d in 1..100i64 {
            let k = kernel(n * d);
            classes.insert(k);
            classes.insert(-k);
        }
    }
    let classes: Vec<(i64, Vec<u64>)> = classes.into_iter().map(|k| (k, factorize(k.unsigned_abs()).primes().collect())).collect();
    let mut bad = 0usize;
    let mut pairs = 0usize;
    for (i, (a, pa)) in classes.iter().enumerate() {
        for (b, pb) in &classes[i..] {
            let mut prod = hilbert_symbol_int(*a as i128, *b as i128, Place::Infinite);
            let mut primes: Vec<u64> = pa.iter().chain(pb).copied().chain([2]).collect();
            primes.sort_unstable();
            primes.dedup();
            for p in primes {
                prod *= hilbert_symbol_int(*a as i128, *b as i128, Place::Finite(p));
            }
            bad += usize::from(prod != 1);
            pairs += 1;
        }
    }
    let mut worst: f64 = 0.0;
    let mut gauss = 0;
    for p in (2..=50u64).filter(|&p| crate::arith::is_prime(p)) {
        for chi in LocalQuadChar::all(Place::Finite(p)).into_iter().filter(|c| c.is_ramified()) {
            let g = gauss_sum(&chi)?;
            worst = worst.max((g.norm() - (chi.conductor_norm() as f64).powf(-0.5)).abs());
            gauss += 1;
        }
    }
    Ok((
        bad == 0 && worst <= GAUSS_TOL,
        format!("{pairs} square-class pairs, {bad} product-formula failures; {gauss} Gauss sums, worst |g| deviation {worst:.1e}"),
    ))
}
