//! Subcommand implementations.

use std::path::Path;

use rug::{Complex, Float, Rational};
use serde_json::{Map, Value};
use thiserror::Error;

use knotlab::acurve::{self, AcurveError, CsVolume};
use knotlab::asymfit::{self, AsymError, FitOptions, FitReport};
use knotlab::cjones::{self, CjonesError};
use knotlab::knotcore::{self, KnotError};
use knotlab::num::{abs_bound, bits_for_digits, i_pi, unit_roundoff};
use knotlab::qrec::{self, JSequence, QrecError, RecursionOptions};
use knotlab::quantize::{self, PoissonBivector, PolyObs, QuantizeError};
use knotlab::table::{KnotTable, TableError};

use crate::report::{Format, Report, Row};
use crate::Common;

const BOUND_PREC: u32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<KnotError> for CliError {
    fn from(e: KnotError) -> Self {
        match e {
            KnotError::CrossingBudget(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CjonesError> for CliError {
    fn from(e: CjonesError) -> Self {
        match e {
            CjonesError::Knot(k) => k.into(),
            CjonesError::Input(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<AcurveError> for CliError {
    fn from(e: AcurveError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<AsymError> for CliError {
    fn from(e: AsymError) -> Self {
        match e {
            AsymError::UnsupportedKnot(_) | AsymError::TooFewSamples { .. } => CliError::Usage(e.to_string()),
            AsymError::Cjones(c) => c.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<QrecError> for CliError {
    fn from(e: QrecError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<QuantizeError> for CliError {
    fn from(e: QuantizeError) -> Self {
        match e {
            QuantizeError::Budget(_) | QuantizeError::Energy => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub fn load_table(path: Option<&Path>) -> Result<KnotTable, CliError> {
    Ok(match path {
        Some(p) => KnotTable::load(p)?,
        None => KnotTable::builtin(),
    })
}

/// `a:b` or `a:b:step` with `1 ≤ a ≤ b`.
pub fn parse_range(s: &str) -> Result<(u32, u32, Option<u32>), CliError> {
    let bad = || CliError::Usage(format!("bad range {s:?}, expected a:b or a:b:step"));
    let parts: Vec<&str> = s.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
    let (a, b) = (num(parts[0])?, num(parts[1])?);
    let step = parts.get(2).map(|t| num(t)).transpose()?;
    if a == 0 || a > b || step == Some(0) {
        return Err(bad());
    }
    Ok((a, b, step))
}

fn range_values(a: u32, b: u32, step: u32) -> Vec<u32> {
    (a..=b).step_by(step as usize).collect()
}

fn parse_decimal(s: &str, prec: u32) -> Result<Float, CliError> {
    Float::parse(s)
        .map(|p| Float::with_val(prec, p))
        .map_err(|_| CliError::Usage(format!("bad number {s:?}")))
}

/// `ipi`, `ipi±x`, or `re±im i` (either part may be omitted).
pub fn parse_u(s: &str, prec: u32) -> Result<Complex, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(rest) = t.strip_prefix("ipi") {
        let shift = if rest.is_empty() { Float::new(prec) } else { parse_decimal(rest.trim_start_matches('+'), prec)? };
        return Ok(Complex::with_val(prec, i_pi(prec) + shift));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex::with_val(prec, parse_decimal(&t, prec)?));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other.trim_start_matches('+'),
    };
    Ok(Complex::with_val(prec, (parse_decimal(re, prec)?, parse_decimal(im, prec)?)))
}

fn u_label(u: &Complex) -> String {
    format!("{}+{}i", knotlab::num::fmt_float(u.real(), 20), knotlab::num::fmt_float(u.imag(), 20))
}

fn config(cmd: &str, c: &Common) -> Report {
    Report::new(cmd).meta("digits", c.digits)
}

// ---------------------------------------------------------------------------

pub fn jones(table: &KnotTable, name: &str, format: Format) -> Result<String, CliError> {
    let d = table.get(name)?.diagram()?;
    let j = knotcore::jones(&d)?;
    let pairs = j.q_pairs();
    match format {
        Format::Json => {
            let mut m = Map::new();
            for (k, c) in pairs {
                let v = c.to_i64().map(Value::from).unwrap_or_else(|| Value::String(c.to_string()));
                m.insert(k, v);
            }
            Ok(format!("{}\n", Value::Object(m)))
        }
        Format::Csv => {
            let mut r = Report::new("jones");
            for (k, c) in pairs {
                r.push(Row::new().text("q_exponent", k).text("coefficient", c.to_string()));
            }
            Ok(r.to_csv())
        }
    }
}

pub fn kashaev(table: &KnotTable, knot: &str, range: &str, c: &Common) -> Result<Report, CliError> {
    let rec = table.get(knot)?;
    let d = rec.diagram()?;
    let (a, b, step) = parse_range(range)?;
    let mut report = config("kashaev", c).meta("knot", knot);
    for n in range_values(a, b, step.unwrap_or(1)) {
        let v = if knot == "4_1" {
            cjones::kashaev_41(n, c.digits)?
        } else if d.crossing_count() == 0 {
            cjones::kashaev_from_colored(&cjones::colored_jones_unknot(n), n, c.digits)?
        } else {
            let jn = cjones::colored_jones_by_cabling(&d, n)?;
            cjones::kashaev_from_colored(&jn, n, c.digits)?
        };
        report.push(Row::new().int("N", n as i64).complex("value", &v.value, &v.abs_err, c.digits));
    }
    Ok(report)
}

pub fn volume(table: &KnotTable, knot: &str, u: &str, c: &Common) -> Result<Report, CliError> {
    if knot != "4_1" {
        return Err(CliError::Usage(format!("volume is available for 4_1 only, not {knot:?}")));
    }
    let rec = table.get(knot)?;
    let curve = rec.a_polynomial()?;
    let prec = bits_for_digits(c.digits);
    let u = parse_u(u, prec)?;
    let (seed, opts) = acurve::geometric_seed_41(prec, 1);
    let anchor = match rec.anchor(prec)? {
        Some(a) => a,
        None => acurve::ics_closed_41(&seed.u)?,
    };
    let closed = acurve::ics_closed_41(&u)?;
    // cross-check against the θ-integral along the branch
    let path = acurve::ics_path(curve, &u, 8, &seed, &opts, &anchor, c.digits.min(40))?;
    let mut err = Float::with_val(BOUND_PREC, abs_bound(&Complex::with_val(prec, &closed - &path.value)));
    err += &path.abs_err;
    let v = if abs_bound(&Complex::with_val(prec, &u - &seed.u)) == 0 {
        seed.v_theta()
    } else {
        acurve::solve_branch(curve, &u, &seed, &opts)?.v_theta()
    };
    let cv = CsVolume::from_ics(&u, &closed, &v);
    let v_err = Float::with_val(BOUND_PREC, abs_bound(&v) * unit_roundoff(prec)) * 1_000_000u32;
    let re_u = Float::with_val(BOUND_PREC, u.real().clone().abs());
    let part_err = Float::with_val(BOUND_PREC, &err / 2u32) + v_err * re_u * 2u32;
    let mut report = config("volume", c).meta("knot", knot).meta("u", u_label(&u));
    report.push(
        Row::new()
            .complex("ics", &closed, &err, c.digits)
            .real("vol", &cv.vol, &part_err, c.digits)
            .real("cs", &cv.cs, &part_err, c.digits),
    );
    Ok(report)
}

fn param_err(a: &Complex, b: Option<&Complex>, fallback: &Float) -> Float {
    match b {
        Some(b) => Float::with_val(BOUND_PREC, abs_bound(&Complex::with_val(a.prec(), a - b))),
        None => fallback.clone(),
    }
}

pub fn fit(
    table: &KnotTable,
    knot: &str,
    u: &str,
    range: &str,
    order: usize,
    constrain_log: bool,
    c: &Common,
) -> Result<Report, CliError> {
    table.get(knot)?;
    let prec = bits_for_digits(c.digits);
    let u = parse_u(u, prec)?;
    let (a, b, step) = parse_range(range)?;
    let step = step.unwrap_or_else(|| (b - a).div_ceil(28).max(1));
    let ns = range_values(a, b, step);
    let samples = asymfit::build_sequence(knot, &u, &ns, c.digits)?;
    let opts = FitOptions { model_order: order, constrain_log, digits: c.digits, ..FitOptions::default() };
    let rep = asymfit::fit_expansion(&samples, &opts)?;
    // truncation error estimated from the next-lower model
    let lower: Option<FitReport> = if order > 0 {
        asymfit::fit_expansion(&samples, &FitOptions { model_order: order - 1, ..opts.clone() }).ok()
    } else {
        None
    };
    let fallback = rep.residual.clone();
    let mut report = config("fit", c)
        .meta("knot", knot)
        .meta("u", u_label(&u))
        .meta("fit_ns", rep.fit_ns.clone())
        .meta("held_out", rep.held_out.clone())
        .meta("residual", knotlab::num::fmt_bound(&rep.residual))
        .meta("fit_rms", knotlab::num::fmt_bound(&rep.fit_rms))
        .meta("condition", format!("{:.3e}", rep.condition));
    let mut push = |name: String, v: &Complex, lo: Option<&Complex>| {
        let e = param_err(v, lo, &fallback);
        report.push(Row::new().text("parameter", name).complex("value", v, &e, c.digits));
    };
    push("a".into(), &rep.growth_rate, lower.as_ref().map(|l| &l.growth_rate));
    let b_val = Complex::with_val(prec, &rep.log_coeff);
    let b_lo = lower.as_ref().map(|l| Complex::with_val(prec, &l.log_coeff));
    if constrain_log {
        push("b".into(), &b_val, Some(&b_val));
    } else {
        push("b".into(), &b_val, b_lo.as_ref());
    }
    push("c".into(), &rep.constant, lower.as_ref().map(|l| &l.constant));
    for (i, d) in rep.inverse_coeffs.iter().enumerate() {
        let lo = lower.as_ref().and_then(|l| l.inverse_coeffs.get(i));
        push(format!("d{}", i + 1), d, lo);
    }
    if knot == "4_1" {
        for cmp in asymfit::compare_quantum_vc(&rep, &u, c.digits)? {
            let zero = Float::new(BOUND_PREC);
            report.push(
                Row::new()
                    .text("parameter", format!("compare:{}", cmp.quantity))
                    .complex("value", &cmp.fitted, &zero, c.digits)
                    .complex("predicted", &cmp.predicted, &zero, c.digits)
                    .text("real_part_only", cmp.real_part.to_string())
                    .text("rel_err", knotlab::num::fmt_bound(&cmp.rel_err)),
            );
        }
    }
    Ok(report)
}

pub fn recursion(
    table: &KnotTable,
    knot: &str,
    order: u32,
    degree: u32,
    s_degree: Option<u32>,
    inhomogeneous: bool,
    c: &Common,
) -> Result<Report, CliError> {
    table.get(knot)?;
    let opts = RecursionOptions { order, coeff_degree: degree, s_degree, inhomogeneous, seed: c.seed, ..Default::default() };
    let make = |n: u32| -> Result<JSequence, CliError> {
        match knot {
            "4_1" => Ok(JSequence::figure_eight(n)),
            "unknot" => Ok(JSequence::unknot(n)),
            _ => Err(CliError::Usage(format!("no colored Jones sequence source for {knot:?}"))),
        }
    };
    let mut max_n = 23;
    let found = loop {
        match qrec::discover_recursion(&make(max_n)?, &opts) {
            Err(QrecError::OutOfRange { need, .. }) if (need as u32) > max_n => max_n = need as u32,
            other => break other?,
        }
    };
    let mut report = config("recursion", c)
        .meta("knot", knot)
        .meta("order", order)
        .meta("degree", degree)
        .meta("inhomogeneous", inhomogeneous)
        .meta("found", found.is_some());
    if let Some(r) = found {
        let limit = qrec::classical_limit(&r.op)?;
        report = report
            .meta("s_degree", r.s_degree)
            .meta("fit_window", r.fit_window.clone())
            .meta("held_out", r.held_out.clone())
            .meta("rhs", r.rhs.as_ref().map(|p| p.to_string()))
            .meta("classical_limit", limit.to_string());
        for (coeff, a, b) in r.op.terms() {
            report.push(Row::new().int("l_power", a as i64).int("m_power", b as i64).exact("coefficient", coeff));
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum QuantizeCheck {
    Graphs,
    Moyal,
    Associativity,
    Oscillator,
    BohrSommerfeld,
}

fn parse_rational(s: &str) -> Result<Rational, CliError> {
    s.trim().parse::<Rational>().map_err(|_| CliError::Usage(format!("bad rational {s:?}")))
}

pub fn quantize(check: QuantizeCheck, order: Option<u32>, energy: &str, hbar: &str, c: &Common) -> Result<Report, CliError> {
    let mut report = config("quantize", c);
    match check {
        QuantizeCheck::Graphs => {
            let n = order.unwrap_or(3);
            report = report.meta("check", "graphs");
            for k in 1..=n {
                let count = quantize::enumerate_graphs(k)?.len() as u64;
                let formula = (k as u64).pow(k) * (k as u64 + 1).pow(k);
                report.push(Row::new().int("order", k as i64).exact("count", count).exact("formula", formula));
            }
        }
        QuantizeCheck::Moyal => {
            report = report.meta("check", "moyal");
            let alpha = PoissonBivector::canonical(1);
            let (x, p) = (PolyObs::var(2, 0), PolyObs::var(2, 1));
            let products = [
                ("x*p", quantize::moyal(&x, &p, &alpha, None)?),
                ("p*x", quantize::moyal(&p, &x, &alpha, None)?),
                ("[x,p]", quantize::star_commutator(&x, &p, &alpha)?),
            ];
            for (name, series) in products {
                for (k, coeff) in series.coeffs.iter().enumerate() {
                    report.push(Row::new().text("product", name).int("hbar_power", k as i64).exact("coefficient", coeff));
                }
            }
        }
        QuantizeCheck::Associativity => {
            report = report.meta("check", "associativity").meta("seed", c.seed);
            let alpha = PoissonBivector::canonical(1);
            for (i, [f, g, h]) in quantize::random_triples(20, 2, 4, c.seed).iter().enumerate() {
                let fg = quantize::moyal(f, g, &alpha, None)?;
                let gh = quantize::moyal(g, h, &alpha, None)?;
                let left = quantize::moyal_series(&fg, &quantize::HbarSeries::from_poly(h.clone()), &alpha)?;
                let right = quantize::moyal_series(&quantize::HbarSeries::from_poly(f.clone()), &gh, &alpha)?;
                report.push(Row::new().int("triple", i as i64).text("associative", left.sub(&right).is_zero().to_string()));
            }
        }
        QuantizeCheck::Oscillator => {
            let top = order.unwrap_or(6);
            report = report.meta("check", "oscillator");
            for n in 0..=top {
                let r = quantize::oscillator_check(n)?;
                let shifted = quantize::oscillator_residual(n, &Rational::from(n + 1));
                report.push(
                    Row::new()
                        .int("n", n as i64)
                        .text("energy", format!("hbar*({n}+1/2)"))
                        .text("residual_zero", r.is_zero().to_string())
                        .text("residual_zero_at_hbar_n_plus_1", shifted.is_zero().to_string()),
                );
            }
        }
        QuantizeCheck::BohrSommerfeld => {
            let e = parse_rational(energy)?;
            let h = parse_rational(hbar)?;
            let bs = quantize::bohr_sommerfeld(&e, &h)?;
            let ef = e.to_f64();
            let action = quantize::loop_action(ef, 256);
            let want = 2.0 * std::f64::consts::PI * ef;
            let prec = 53;
            report = report.meta("check", "bohr-sommerfeld");
            report.push(
                Row::new()
                    .exact("energy", &e)
                    .exact("hbar", &h)
                    .text("quantizable", bs.quantizable.to_string())
                    .text("level", bs.n.map(|n| n.to_string()).unwrap_or_default())
                    .real(
                        "loop_action",
                        &Float::with_val(prec, action),
                        &Float::with_val(prec, (action - want).abs() + want * f64::EPSILON * 256.0),
                        15,
                    ),
            );
        }
    }
    Ok(report)
}
