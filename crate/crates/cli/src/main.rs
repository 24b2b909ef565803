use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};
use shintani::asym::{emit_csv, fit_asymptotic, partial_sum_h, read_csv, SumSeries};
use shintani::characters::{LocalQuadChar, OmegaS, Place};
use shintani::congruence::{xi_direct, xi_s_infty, XiVariant};
use shintani::double_zeta::{
    cohen_h, d_m_value, l_m_coefficient_check, l_m_prefactor, verify_fe1_all, verify_fe2_all, verify_new_fe, verify_shintani_fe, xi_delta_from,
    xi_tilde_all,
};
use shintani::lfun::{ComplexPair, EvalConfig};
use shintani::local_zeta::{brute_force_series, closed_form_char, closed_form_delta, default_guard, Weight};
use shintani::poly::RationalFunction2;
use shintani::{selftest, Error};
use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

const CONFIG_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "shintani", version, about = "Shintani double zeta functions over Q")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key=value file with defaults: version, target, max_terms, em_order, threads
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// L-value error target (default 1e-12; 1e-10 for verify-fe1/verify-shintani, 1e-9 for verify-fe2)
    #[arg(long, global = true)]
    target: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Point {
    /// s1 as "re[,im]"
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    s1: Complex64,
    /// s2 as "re[,im]"
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    s2: Complex64,
}

impl Point {
    fn pair(&self) -> ComplexPair {
        ComplexPair::new(self.s1, self.s2)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Truncated double series ξ_i / ξ_i* with a certified tail bound
    EvalXiDirect {
        /// xi1, xi2, xi1star, xi2star
        #[arg(long)]
        variant: String,
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value_t = 2000)]
        m_cut: u64,
        #[arg(long, default_value_t = 2000)]
        n_cut: u64,
    },
    /// ξ̃^S(s, ω) from the character sum, or ξ^S(s, δ) with --delta
    EvalXiExplicit {
        #[command(flatten)]
        point: Point,
        /// S as "inf,2,3"
        #[arg(long, default_value = "inf")]
        places: String,
        /// restrict to one ω_S, e.g. "inf:-;2:+ - +"
        #[arg(long)]
        omega: Option<String>,
        /// square-class representatives, one per place, e.g. "-1,5"
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        #[arg(long = "X", default_value_t = 2000)]
        x: u64,
    },
    /// D_m(s, ω_S)
    #[command(name = "eval-Dm")]
    EvalDm {
        #[arg(long)]
        m: u32,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        s: Complex64,
        #[arg(long)]
        omega: String,
        #[arg(long = "X", default_value_t = 2000)]
        x: u64,
    },
    /// L_m(s, ω_S), optionally against the Cohen series up to --check-x
    #[command(name = "eval-Lm")]
    EvalLm {
        #[arg(long)]
        m: u32,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        s: Complex64,
        #[arg(long)]
        omega: String,
        #[arg(long = "X", default_value_t = 2000)]
        x: u64,
        #[arg(long)]
        check_x: Option<u64>,
    },
    /// H(m/2, N, ω_S)
    Cohen {
        #[arg(long)]
        m: u32,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        omega: String,
    },
    /// Closed-form local zeta function, optionally checked against enumeration
    LocalZeta {
        #[arg(long)]
        p: u64,
        /// local character, e.g. "3:+ -"
        #[arg(long)]
        chi: Option<String>,
        /// square class δ (odd p only)
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<i64>,
        #[arg(long, default_value_t = 4)]
        degree: u32,
        #[arg(long)]
        oracle: bool,
    },
    /// Direct series vs character sums at S = {∞}
    VerifyExplicit {
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value_t = 2000)]
        cut: u64,
        #[arg(long = "X", default_value_t = 2000)]
        x: u64,
    },
    /// Ξ^S(s1+s2-1/2, 1-s2, ω) = Γ_S(s2, ω) Ξ^S(s, ω) for all ω_S
    VerifyFe1 {
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value = "inf")]
        places: String,
        #[arg(long = "X", default_value_t = 1000)]
        x: u64,
    },
    /// Ξ^S((s1, 3/2-s1-s2), ω) = Σ_χ G̃_S Ξ^S(s, χ) for all ω_S
    VerifyFe2 {
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value = "inf,2")]
        places: String,
        #[arg(long = "X", default_value_t = 1000)]
        x: u64,
    },
    /// The variables-interchanged equation for ξ_j and the equation for ξ_1* ± ξ_2*
    VerifyShintani {
        #[command(flatten)]
        point: Point,
        #[arg(long = "X", default_value_t = 2000)]
        x: u64,
    },
    /// Partial sums of H(1/2, N, ω_S) with the A x log x + B x fit
    Average {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        omega: String,
        /// CSV destination (x, sum, model, residual)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a CSV with columns x,sum (further columns ignored)
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite
    Selftest {
        /// comma-separated criterion ids (default: all)
        #[arg(long)]
        only: Option<String>,
    },
}

fn parse_complex(text: &str) -> Result<Complex64, String> {
    let mut parts = text.split(',');
    let re = parts.next().unwrap_or("").trim().parse::<f64>().map_err(|_| format!("bad real part in '{text}'"))?;
    let im = match parts.next() {
        Some(t) => t.trim().parse::<f64>().map_err(|_| format!("bad imaginary part in '{text}'"))?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(format!("expected re[,im], got '{text}'"));
    }
    Ok(Complex64::new(re, im))
}

fn parse_places(text: &str) -> shintani::Result<Vec<Place>> {
    text.split(',')
        .map(|t| match t.trim() {
            "inf" | "oo" | "∞" => Ok(Place::Infinite),
            p => p.parse::<u64>().map_err(|_| Error::InvalidInput(format!("bad place '{p}'"))).and_then(Place::finite),
        })
        .collect()
}

struct Settings {
    cfg: EvalConfig,
    threads: Option<usize>,
}

/// Functional-equation checks evaluate L at negative arguments, where 1e-12 is out of reach in f64.
fn default_target(cmd: &Command) -> Option<f64> {
    match cmd {
        Command::VerifyFe1 { .. } | Command::VerifyShintani { .. } => Some(1e-10),
        Command::VerifyFe2 { .. } => Some(1e-9),
        _ => None,
    }
}

fn load_settings(cli: &Cli) -> shintani::Result<Settings> {
    let mut cfg = EvalConfig::default();
    if let Some(t) = default_target(&cli.command) {
        cfg.target_abs_error = t;
    }
    let mut threads = None;
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key=value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = || Error::InvalidInput(format!("config line {}: bad value for {k}", n + 1));
            match k {
                "version" => {
                    if v.parse::<u32>().map_err(|_| bad())? != CONFIG_VERSION {
                        return Err(Error::InvalidInput(format!("unsupported config version {v}")));
                    }
                }
                "target" => cfg.target_abs_error = v.parse().map_err(|_| bad())?,
                "max_terms" => cfg.max_terms = v.parse().map_err(|_| bad())?,
                "em_order" => cfg.euler_maclaurin_order = v.parse().map_err(|_| bad())?,
                "threads" => threads = Some(v.parse().map_err(|_| bad())?),
                _ => return Err(Error::InvalidInput(format!("config line {}: unknown key {k}", n + 1))),
            }
        }
    }
    if let Some(t) = cli.target {
        cfg.target_abs_error = t;
    }
    if cli.threads.is_some() {
        threads = cli.threads;
    }
    cfg.validate()?;
    Ok(Settings { cfg, threads })
}

/// Rounds every float to 15 significant digits.
fn round15(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().expect("f64");
            let r: f64 = format!("{f:.14e}").parse().expect("float");
            serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round15).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round15(v))).collect()),
        other => other,
    }
}

fn cplx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn rational_json(r: &RationalFunction2) -> Value {
    json!({"num": r.num.to_json(), "den": r.den.to_json()})
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

enum Outcome {
    Json(Value),
    /// JSON plus a failing status (exit 3)
    Failed(Value),
}

fn write_csv(series: &SumSeries, fit: &shintani::asym::FitResult, out: &Option<PathBuf>) -> shintani::Result<()> {
    if let Some(path) = out {
        let f = File::create(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        emit_csv(series, fit, f)?;
    }
    Ok(())
}

fn run(cmd: &Command, cfg: &EvalConfig) -> shintani::Result<Outcome> {
    let out = match cmd {
        Command::EvalXiDirect { variant, point, m_cut, n_cut } => {
            let d = xi_direct(XiVariant::parse(variant)?, point.pair(), *m_cut, *n_cut)?;
            json!({"variant": variant, "value": cplx(d.value), "m_cut": d.truncation.m_cut, "n_cut": d.truncation.n_cut, "tail_bound": d.truncation.tail_bound})
        }
        Command::EvalXiExplicit { point, places, omega, delta, x } => {
            let places = match omega {
                Some(o) => OmegaS::parse(o)?.places(),
                None => parse_places(places)?,
            };
            let all = xi_tilde_all(point.pair(), &places, *x, cfg)?;
            if let Some(d) = delta {
                let d: Vec<i64> = d.split(',').map(|t| t.trim().parse().map_err(|_| Error::InvalidInput(format!("bad δ '{t}'")))).collect::<Result<_, _>>()?;
                let (v, e) = xi_delta_from(&all, &d)?;
                json!({"delta": d, "value": cplx(v), "uncertainty": e, "X": x})
            } else {
                let want = omega.as_deref().map(OmegaS::parse).transpose()?;
                let rows: Vec<Value> = all
                    .iter()
                    .filter(|t| want.as_ref().is_none_or(|w| *w == t.omega))
                    .map(|t| json!({"omega": t.omega.to_string(), "value": cplx(t.value), "tail": t.tail, "eval_error": t.eval_error, "certified": t.certified, "terms": t.terms}))
                    .collect();
                json!({"X": x, "xi_tilde": rows})
            }
        }
        Command::EvalDm { m, s, omega, x } => {
            let om = OmegaS::parse(omega)?;
            let v = d_m_value(*s, *m, &om, *x, cfg)?;
            json!({"m": m, "s": cplx(*s), "omega": omega, "value": cplx(v.value), "tail": v.tail, "eval_error": v.eval_error, "certified": v.certified})
        }
        Command::EvalLm { m, s, omega, x, check_x } => {
            let om = OmegaS::parse(omega)?;
            match check_x {
                Some(cx) => {
                    let r = l_m_coefficient_check(*m, &om, *s, *cx, *x, cfg)?;
                    json!({"m": m, "s": cplx(*s), "omega": omega, "l_m": cplx(r.l_m), "series": cplx(r.series), "residual": r.residual, "n_terms": r.n_terms, "dm_uncertainty": r.dm_uncertainty})
                }
                None => {
                    let v = d_m_value(*s, *m, &om, *x, cfg)?;
                    let f = l_m_prefactor(*s, *m, &om)?;
                    json!({"m": m, "s": cplx(*s), "omega": omega, "value": cplx(v.value * f), "uncertainty": v.uncertainty() * f.norm()})
                }
            }
        }
        Command::Cohen { m, n, omega } => to_value(&cohen_h(*m, *n, &OmegaS::parse(omega)?, cfg)?),
        Command::LocalZeta { p, chi, delta, degree, oracle } => {
            let (closed, weight) = match (chi, delta) {
                (Some(c), None) => {
                    let c = LocalQuadChar::parse(c)?;
                    if c.place() != Place::Finite(*p) {
                        return Err(Error::InvalidInput(format!("character {c} does not live at p = {p}")));
                    }
                    (closed_form_char(&c)?, Weight::Character(c))
                }
                (None, Some(d)) => (closed_form_delta(*p, *d)?, Weight::Class(*d)),
                _ => return Err(Error::InvalidInput("give exactly one of --chi, --delta".into())),
            };
            let mut v = json!({"p": p, "closed_form": rational_json(&closed)});
            if *oracle {
                let brute = brute_force_series(*p, &weight, *degree, default_guard(*p))?;
                let mism = brute.mismatches(&closed.series(*degree)?);
                v["degree"] = json!(degree);
                v["status"] = json!(if mism.is_empty() { "exact match" } else { "mismatch" });
                v["mismatches"] = json!(mism);
                if !mism.is_empty() {
                    return Ok(Outcome::Failed(v));
                }
            }
            v
        }
        Command::VerifyExplicit { point, cut, x } => {
            let s = point.pair();
            let plus = xi_s_infty(1, s, *cut, *cut)?;
            let minus = xi_s_infty(-1, s, *cut, *cut)?;
            let rows: Vec<Value> = xi_tilde_all(s, &[Place::Infinite], *x, cfg)?
                .into_iter()
                .map(|t| {
                    let sign = if t.omega.is_trivial() { 1.0 } else { -1.0 };
                    let lhs = plus.value + minus.value * sign;
                    let tail = plus.truncation.tail_bound + minus.truncation.tail_bound + t.uncertainty();
                    json!({"omega": t.omega.to_string(), "lhs": cplx(lhs), "rhs": cplx(t.value), "diff": (lhs - t.value).norm(), "certified_tail": tail, "certified": t.certified})
                })
                .collect();
            json!({"cut": cut, "X": x, "checks": rows})
        }
        Command::VerifyFe1 { point, places, x } => to_value(&verify_fe1_all(point.pair(), &parse_places(places)?, *x, cfg)?),
        Command::VerifyFe2 { point, places, x } => to_value(&verify_fe2_all(point.pair(), &parse_places(places)?, *x, cfg)?),
        Command::VerifyShintani { point, x } => {
            let s = point.pair();
            let mut rows = Vec::new();
            for j in [1u8, 2] {
                rows.push(json!({"equation": "interchanged", "branch": j, "result": to_value(&verify_shintani_fe(j, s, *x, cfg)?)}));
            }
            for k in [0u8, 1] {
                rows.push(json!({"equation": "new", "branch": k, "result": to_value(&verify_new_fe(k, s, *x, cfg)?)}));
            }
            Value::Array(rows)
        }
        Command::Average { x, omega, out } => {
            let series = partial_sum_h(*x, &OmegaS::parse(omega)?, cfg)?;
            let fit = fit_asymptotic(&series)?;
            write_csv(&series, &fit, out)?;
            json!({"series": to_value(&series), "fit": to_value(&fit)})
        }
        Command::Fit { input, out } => {
            let f = File::open(input).map_err(|e| Error::InvalidInput(format!("{}: {e}", input.display())))?;
            let series = SumSeries { checkpoints: read_csv(f)?, terms: 0, negative_terms: 0, numeric_error: 0.0 };
            let fit = fit_asymptotic(&series)?;
            write_csv(&series, &fit, out)?;
            to_value(&fit)
        }
        Command::Selftest { only } => {
            let ids: Vec<u8> = match only {
                Some(t) => t.split(',').map(|v| v.trim().parse().map_err(|_| Error::InvalidInput(format!("bad id '{v}'")))).collect::<Result<_, _>>()?,
                None => Vec::new(),
            };
            let results = selftest::run(&ids);
            let v = to_value(&results);
            if results.iter().any(|r| !r.passed) {
                return Ok(Outcome::Failed(v));
            }
            v
        }
    };
    Ok(Outcome::Json(out))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::Pole(_) => 2,
        Error::Precision { .. } | Error::Convergence(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = match load_settings(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(t) = settings.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let (value, code) = match run(&cli.command, &settings.cfg) {
        Ok(Outcome::Json(v)) => (v, 0),
        Ok(Outcome::Failed(v)) => (v, 3),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    println!("{}", serde_json::to_string_pretty(&round15(value)).expect("json"));
    ExitCode::from(code)
}
