//! Partial sums of H(1/2, N, ω_S) and the A x log x + B x fit.

use crate::characters::{OmegaS, QuadraticCharacter};
use crate::double_zeta::{cohen_divisor_sum, enumerate_n};
use crate::error::{invalid, Error, Result};
use crate::lfun::{l_value_real, EvalConfig};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumSeries {
    /// (x, Σ_{N ≤ x} H(1/2, N, ω_S)), x strictly increasing
    pub checkpoints: Vec<(f64, f64)>,
    pub terms: usize,
    pub negative_terms: usize,
    /// accumulated L-value error over all terms
    pub numeric_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub residuals: Vec<(f64, f64)>,
    /// `power_exponent` when identifiable, else `slope_exponent`.
    pub exponent_estimate: f64,
    /// Log-log slope of |r(x)| over the checkpoints with r ≠ 0.
    pub slope_exponent: f64,
    /// θ of the joint model A' x log x + B' x + C x^θ; None when the optimum sits at θ → 1.
    pub power_exponent: Option<f64>,
    /// C in the joint model.
    pub error_amplitude: f64,
}

impl FitResult {
    pub fn model(&self, x: f64) -> f64 {
        self.a * x * x.ln() + self.b * x
    }
}

/// Geometric checkpoints x·2^{-k} ≥ 1, increasing.
pub fn checkpoint_grid(x: u64) -> Vec<u64> {
    let mut g: Vec<u64> = (0..64).map(|k| x >> k).take_while(|&v| v >= 1).collect();
    g.reverse();
    g.dedup();
    g
}

pub fn partial_sum_h(x: u64, omega: &OmegaS, cfg: &EvalConfig) -> Result<SumSeries> {
    if x < 1 {
        return invalid("x must be at least 1");
    }
    let ns = enumerate_n(omega, x)?;
    let mut ds: Vec<i64> = ns.iter().map(|t| t.1).collect();
    ds.sort_unstable();
    ds.dedup();
    let lvals: BTreeMap<i64, (f64, f64)> = ds
        .par_iter()
        .map(|&d| {
            let chi = QuadraticCharacter::from_int(d)?;
            let e = l_value_real(0.5, &chi, cfg)?;
            Ok((d, (e.value, e.error)))
        })
        .collect::<Result<_>>()?;
    let grid = checkpoint_grid(x);
    let mut checkpoints = Vec::with_capacity(grid.len());
    let mut acc = crate::scalar::KahanSum::<f64>::new();
    let (mut negative, mut err) = (0, 0.0);
    let mut it = ns.iter().peekable();
    for &g in &grid {
        while let Some(&&(n, d, f)) = it.peek() {
            if n > g {
                break;
            }
            let w = cohen_divisor_sum(1, d, f);
            let (l, le) = lvals[&d];
            let h = l * w;
            if !h.is_finite() {
                return Err(Error::Precision { achieved: f64::INFINITY });
            }
            negative += usize::from(h < 0.0);
            err += le * w.abs();
            acc.add(h);
            it.next();
        }
        checkpoints.push((g as f64, acc.value()));
    }
    Ok(SumSeries { checkpoints, terms: ns.len(), negative_terms: negative, numeric_error: err })
}

/// Least squares for y ≈ a f(x) + b g(x) with column scaling.
pub fn least_squares_2(pts: &[(f64, f64)], f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    if pts.len() < 2 {
        return invalid("need at least two points");
    }
    let cols: Vec<(f64, f64, f64)> = pts.iter().map(|&(x, y)| (f(x), g(x), y)).collect();
    let nf = cols.iter().map(|c| c.0 * c.0).sum::<f64>().sqrt();
    let ng = cols.iter().map(|c| c.1 * c.1).sum::<f64>().sqrt();
    if nf == 0.0 || ng == 0.0 {
        return Err(Error::InvalidInput("degenerate design matrix".into()));
    }
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(u, v, y) in &cols {
        let (u, v) = (u / nf, v / ng);
        s11 += u * u;
        s12 += u * v;
        s22 += v * v;
        t1 += u * y;
        t2 += v * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-14 {
        return Err(Error::InvalidInput("degenerate design matrix".into()));
    }
    let a = (s22 * t1 - s12 * t2) / det;
    let b = (s11 * t2 - s12 * t1) / det;
    Ok((a / nf, b / ng))
}

/// Weighted least squares for y ≈ A x log x + B x + C x^θ at fixed θ; returns (rss, C).
fn joint_fit(pts: &[(f64, f64)], theta: f64) -> Result<(f64, f64)> {
    let n = pts.len();
    let w: Vec<f64> = pts.iter().map(|p| p.0.powf(-theta)).collect();
    let design = DMatrix::from_fn(n, 3, |i, j| {
        let x = pts[i].0;
        w[i] * [x * x.ln(), x, x.powf(theta)][j]
    });
    let rhs = DVector::from_fn(n, |i, _| w[i] * pts[i].1);
    let coef = design.clone().svd(true, true).solve(&rhs, 1e-13).map_err(|e| Error::InvalidInput(format!("least squares: {e}")))?;
    Ok(((design * &coef - rhs).norm_squared(), coef[2]))
}

/// Above this the x^θ column is numerically collinear with x.
const POWER_THETA_MAX: f64 = 0.97;

/// θ minimizing the joint-fit residual over (0, 1), by a grid search refined by golden section.
fn error_exponent(pts: &[(f64, f64)]) -> Result<(f64, f64)> {
    let rss = |t: f64| joint_fit(pts, t).map(|r| r.0);
    let grid: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
    let mut best = (f64::INFINITY, 0.5);
    for &t in &grid {
        let r = rss(t)?;
        if r < best.0 {
            best = (r, t);
        }
    }
    let (mut lo, mut hi) = ((best.1 - 0.01).max(1e-3), (best.1 + 0.01).min(1.0 - 1e-3));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..40 {
        let (m1, m2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if rss(m1)? < rss(m2)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let theta = 0.5 * (lo + hi);
    Ok((theta, joint_fit(pts, theta)?.1))
}

pub fn fit_asymptotic(series: &SumSeries) -> Result<FitResult> {
    let pts = &series.checkpoints;
    if pts.len() < 8 {
        return invalid(format!("need at least 8 checkpoints, got {}", pts.len()));
    }
    if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
        return invalid("checkpoints must be strictly increasing");
    }
    if pts[pts.len() - 1].0 / pts[0].0 < 100.0 {
        return invalid("checkpoints must span at least two decades");
    }
    let upper = &pts[pts.len() / 2..];
    let (a, b) = least_squares_2(upper, |x| x * x.ln(), |x| x)?;
    let residuals: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, y - a * x * x.ln() - b * x)).collect();
    let logs: Vec<(f64, f64)> = residuals.iter().filter(|r| r.1 != 0.0).map(|r| (r.0.ln(), r.1.abs().ln())).collect();
    if logs.len() < 2 {
        return Ok(FitResult { a, b, residuals, exponent_estimate: f64::NAN, slope_exponent: f64::NAN, power_exponent: None, error_amplitude: 0.0 });
    }
    let (slope_exponent, _) = least_squares_2(&logs, |t| t, |_| 1.0)?;
    let (theta, error_amplitude) = error_exponent(pts)?;
    let power_exponent = (theta <= POWER_THETA_MAX).then_some(theta);
    let exponent_estimate = power_exponent.unwrap_or(slope_exponent);
    Ok(FitResult { a, b, residuals, exponent_estimate, slope_exponent, power_exponent, error_amplitude })
}

pub const CSV_HEADER: [&str; 4] = ["x", "sum", "model", "residual"];

pub fn emit_csv<W: Write>(series: &SumSeries, fit: &FitResult, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for &(x, sum) in &series.checkpoints {
        let model = fit.model(x);
        w.write_record([x, sum, model, sum - model].map(|v| format!("{v:.17e}"))).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}

/// (x, sum) pairs from a CSV whose first two columns are `x,sum`, such as one written by `emit_csv`.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<(f64, f64)>> {
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = r.headers().map_err(io)?.clone();
    if headers.iter().take(2).collect::<Vec<_>>() != CSV_HEADER[..2] {
        return invalid("csv must start with columns x,sum");
    }
    let num = |f: Option<&str>| -> Result<f64> {
        let f = f.ok_or_else(|| Error::InvalidInput("short csv row".into()))?;
        f.trim().parse().map_err(|_| Error::InvalidInput(format!("bad number '{f}'")))
    };
    r.records()
        .map(|rec| {
            let rec = rec.map_err(io)?;
            Ok((num(rec.get(0))?, num(rec.get(1))?))
        })
        .collect()
}
