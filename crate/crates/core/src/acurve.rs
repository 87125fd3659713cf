//! A-polynomial curves, the dilogarithm and the complexified Chern-Simons
//! functional of the figure-eight knot.
//!
//! Logarithms of the longitude eigenvalue are tracked continuously. For the
//! one-form `θ = -(v_θ + iπ) du` the longitude is taken as `e^(v_θ) = -ℓ`
//! where `ℓ` is the root of the A-polynomial; `BranchPoint::v` stores
//! `log ℓ` itself, so `v_θ = v - iπ`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{bits_for_digits, i_pi, log_near, pi, tol, unit_roundoff, Certified, BOUND_PREC};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcurveError {
    #[error("path passes a ramification point near u = {0}")]
    Ramification(String),
    #[error("branch tracking failed near u = {0}")]
    StepFailure(String),
    #[error("seed is a singular point of the curve; a tangent hint is required")]
    SingularSeed,
    #[error("seed is not on the curve (|A| = {0})")]
    SeedOffCurve(String),
    #[error("quadratic for p degenerates near u = {0}")]
    Degenerate(String),
    #[error("square-root branch point of the torsion radicand near u = {0}")]
    TorsionBranchPoint(String),
    #[error("path integral did not converge (last change {0})")]
    NonConvergent(String),
    #[error("dilogarithm lost precision at z = {0}")]
    Precision(String),
}

fn short(z: &Complex) -> String {
    format!("{:.6}{:+.6}i", z.real().to_f64(), z.imag().to_f64())
}

// ---------------------------------------------------------------------------
// Polynomials in (ℓ, m)

/// Integer polynomial in `ℓ` and `m`; terms keyed by `(deg ℓ, deg m)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), Integer>,
}

/// Values of `F(u, v) = A(e^v, e^u)` and its derivatives up to second order.
#[derive(Clone, Debug)]
pub struct CurveJet {
    pub f: Complex,
    pub fu: Complex,
    pub fv: Complex,
    pub fuu: Complex,
    pub fuv: Complex,
    pub fvv: Complex,
}

impl BivarPoly {
    /// From `(coefficient, deg ℓ, deg m)` triples; repeated monomials add up.
    pub fn from_terms<C: Into<Integer> + Clone>(terms: &[(C, u32, u32)]) -> Self {
        let mut p = Self::default();
        for (c, a, b) in terms {
            p.add_term(*a, *b, c.clone().into());
        }
        p
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: Integer) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry((a, b)).or_default();
        *e += c;
        if *e == 0 {
            self.terms.remove(&(a, b));
        }
    }

    /// Figure-eight A-polynomial `(ℓ - 1)(m^4 ℓ^2 - (1 - m^2 - 2m^4 - m^6 + m^8) ℓ + m^4)`.
    pub fn figure_eight() -> Self {
        let l_minus_1 = Self::from_terms(&[(1, 1, 0), (-1, 0, 0)]);
        &l_minus_1 * &Self::figure_eight_geometric()
    }

    /// Geometric factor of the figure-eight A-polynomial.
    pub fn figure_eight_geometric() -> Self {
        Self::from_terms(&[
            (1, 2, 4),
            (-1, 1, 0),
            (1, 1, 2),
            (2, 1, 4),
            (1, 1, 6),
            (-1, 1, 8),
            (1, 0, 4),
        ])
    }

    /// Canonically ordered `(coefficient, deg ℓ, deg m)` triples.
    pub fn terms(&self) -> Vec<(Integer, u32, u32)> {
        self.terms.iter().map(|((a, b), c)| (c.clone(), *a, *b)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg_l(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn deg_m(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn eval(&self, l: &Complex, m: &Complex) -> Complex {
        let prec = l.prec().0.max(m.prec().0);
        let mut acc = Complex::new(prec);
        for ((a, b), c) in &self.terms {
            let t = Complex::with_val(prec, l.pow(*a)) * Complex::with_val(prec, m.pow(*b));
            acc += t * c;
        }
        acc
    }

    /// Coefficients in `ℓ` (ascending) at a numeric `m`.
    pub fn l_coeffs(&self, m: &Complex) -> Vec<Complex> {
        let prec = m.prec().0;
        let mut out = vec![Complex::new(prec); self.deg_l() as usize + 1];
        for ((a, b), c) in &self.terms {
            out[*a as usize] += Complex::with_val(prec, m.pow(*b)) * c;
        }
        out
    }

    /// Coefficients in `ℓ` (ascending) at an integer `m`.
    pub fn l_coeffs_int(&self, m: i64) -> Vec<Integer> {
        let mut out = vec![Integer::new(); self.deg_l() as usize + 1];
        for ((a, b), c) in &self.terms {
            out[*a as usize] += Integer::from(m).pow(*b) * c;
        }
        out
    }

    /// `F(u, v) = A(e^v, e^u)` with its first and second derivatives.
    pub fn jet(&self, u: &Complex, v: &Complex) -> CurveJet {
        let prec = u.prec().0.max(v.prec().0);
        let z = || Complex::new(prec);
        let mut j = CurveJet { f: z(), fu: z(), fv: z(), fuu: z(), fuv: z(), fvv: z() };
        for ((a, b), c) in &self.terms {
            let arg = Complex::with_val(prec, v * *a) + Complex::with_val(prec, u * *b);
            let e = Complex::with_val(prec, arg.exp_ref()) * c;
            let (a, b) = (*a as i64, *b as i64);
            j.fu += Complex::with_val(prec, &e * b);
            j.fv += Complex::with_val(prec, &e * a);
            j.fuu += Complex::with_val(prec, &e * (b * b));
            j.fuv += Complex::with_val(prec, &e * (a * b));
            j.fvv += Complex::with_val(prec, &e * (a * a));
            j.f += e;
        }
        j
    }

    /// Exact quotient, or `None` when the division leaves a remainder.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (&(da, db), dc) = d.terms.iter().next_back()?;
        let mut r = self.clone();
        let mut q = Self::default();
        while let Some((&(ra, rb), rc)) = r.terms.iter().next_back() {
            if ra < da || rb < db || !rc.is_divisible(dc) {
                return None;
            }
            let c = Integer::from(rc.div_exact_ref(dc));
            let mono = Self::from_terms(&[(c.clone(), ra - da, rb - db)]);
            r = &r - &(&mono * d);
            q.add_term(ra - da, rb - db, c);
        }
        Some(q)
    }
}

impl std::ops::Mul for &BivarPoly {
    type Output = BivarPoly;
    fn mul(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = BivarPoly::default();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &rhs.terms {
                out.add_term(a1 + a2, b1 + b2, Integer::from(c1 * c2));
            }
        }
        out
    }
}

impl std::ops::Sub for &BivarPoly {
    type Output = BivarPoly;
    fn sub(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for ((a, b), c) in &rhs.terms {
            out.add_term(*a, *b, Integer::from(-c));
        }
        out
    }
}

impl std::ops::Add for &BivarPoly {
    type Output = BivarPoly;
    fn add(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for ((a, b), c) in &rhs.terms {
            out.add_term(*a, *b, c.clone());
        }
        out
    }
}

impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((a, b), c) in self.terms.iter().rev() {
            let sign = if *c < 0 { "-" } else { "+" };
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let abs = Integer::from(c.abs_ref());
            let mut parts = Vec::new();
            if abs != 1 || (*a == 0 && *b == 0) {
                parts.push(abs.to_string());
            }
            match a {
                0 => {}
                1 => parts.push("l".into()),
                _ => parts.push(format!("l^{a}")),
            }
            match b {
                0 => {}
                1 => parts.push("m".into()),
                _ => parts.push(format!("m^{b}")),
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl Serialize for BivarPoly {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<(i64, u32, u32)> = self
            .terms()
            .into_iter()
            .map(|(c, a, b)| (c.to_i64().expect("coefficient fits i64"), a, b))
            .collect();
        rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for BivarPoly {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let rows: Vec<(i64, u32, u32)> = Vec::deserialize(de)?;
        Ok(Self::from_terms(&rows))
    }
}

/// Determinant of an integer matrix by fraction-free elimination.
pub fn bareiss_det(mut m: Vec<Vec<Integer>>) -> Integer {
    let n = m.len();
    if n == 0 {
        return Integer::from(1);
    }
    let mut sign = 1;
    let mut prev = Integer::from(1);
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = Integer::from(&m[i][j] * &m[k][k]) - Integer::from(&m[i][k] * &m[k][j]);
                m[i][j] = t.div_exact(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    Integer::from(&m[n - 1][n - 1] * sign)
}

/// Discriminant of `Σ c_k x^k` (ascending coefficients), exactly.
pub fn discriminant(coeffs: &[Integer]) -> Integer {
    let mut c: Vec<Integer> = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|x| *x == 0) {
        c.pop();
    }
    let n = c.len() - 1;
    if n < 1 {
        return Integer::new();
    }
    let d: Vec<Integer> = (1..=n).map(|k| Integer::from(&c[k] * k as u32)).collect();
    // Sylvester matrix of p (degree n) and p' (degree n-1)
    let size = 2 * n - 1;
    let mut m = vec![vec![Integer::new(); size]; size];
    for r in 0..n - 1 {
        for (k, ck) in c.iter().rev().enumerate() {
            m[r][r + k] = ck.clone();
        }
    }
    for r in 0..n {
        for (k, dk) in d.iter().rev().enumerate() {
            m[n - 1 + r][r + k] = dk.clone();
        }
    }
    let res = bareiss_det(m);
    let sign = if (n * (n - 1) / 2).is_multiple_of(2) { 1 } else { -1 };
    Integer::from(res.div_exact_ref(&c[n])) * sign
}

/// All complex roots of `Σ c_k x^k` by Aberth iteration.
pub fn poly_roots(coeffs: &[Complex]) -> Vec<Complex> {
    let mut c: Vec<Complex> = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|x| x.real().is_zero() && x.imag().is_zero()) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let prec = c[0].prec().0;
    let lead = Float::with_val(BOUND_PREC, c[n].abs_ref());
    let mut radius = Float::with_val(BOUND_PREC, 0);
    for ck in &c[..n] {
        let r = Float::with_val(BOUND_PREC, ck.abs_ref()) / &lead;
        if r > radius {
            radius = r;
        }
    }
    let radius = (radius + 1u32).to_f64().min(1e6);
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex::with_val(prec, (radius * t.cos(), radius * t.sin()))
        })
        .collect();
    let eps = unit_roundoff(prec) * 1024u32;
    for _ in 0..500 {
        let mut moved = Float::with_val(BOUND_PREC, 0);
        for k in 0..n {
            let (p, dp) = horner2(&c, &z[k]);
            if p.real().is_zero() && p.imag().is_zero() {
                continue;
            }
            let w = Complex::with_val(prec, &p / &dp);
            let mut s = Complex::new(prec);
            for j in 0..n {
                if j != k {
                    s += Complex::with_val(prec, Complex::with_val(prec, &z[k] - &z[j]).recip_ref());
                }
            }
            let den = Complex::with_val(prec, 1 - Complex::with_val(prec, &w * &s));
            let step = Complex::with_val(prec, &w / &den);
            let rel = Float::with_val(BOUND_PREC, step.abs_ref())
                / (Float::with_val(BOUND_PREC, z[k].abs_ref()) + 1u32);
            if rel > moved {
                moved = rel;
            }
            z[k] -= step;
        }
        if moved < eps {
            break;
        }
    }
    z
}

fn horner2(c: &[Complex], x: &Complex) -> (Complex, Complex) {
    let prec = x.prec().0;
    let mut p = Complex::new(prec);
    let mut dp = Complex::new(prec);
    for ck in c.iter().rev() {
        dp *= x;
        dp += &p;
        p *= x;
        p += ck;
    }
    (p, dp)
}

// ---------------------------------------------------------------------------
// Dilogarithm

static BERNOULLI: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

/// Bernoulli numbers `B_0..=B_n` with `B_1 = -1/2`.
fn bernoulli(n: usize) -> Vec<Rational> {
    let mut cache = BERNOULLI.lock().expect("bernoulli cache");
    if cache.is_empty() {
        cache.push(Rational::from(1));
    }
    while cache.len() <= n {
        let m = cache.len();
        if m >= 3 && m % 2 == 1 {
            cache.push(Rational::new());
            continue;
        }
        // Σ_{k<m} C(m+1, k) B_k + (m+1) B_m = 0
        let mut acc = Rational::new();
        let mut binom = Integer::from(1);
        for (k, bk) in cache.iter().enumerate() {
            if *bk != 0 {
                acc += Rational::from(bk * &binom);
            }
            binom *= (m + 1 - k) as u32;
            binom /= (k + 1) as u32;
        }
        cache.push(-acc / (m as u32 + 1));
    }
    cache[..=n].to_vec()
}

/// Principal branch of `Li_2(z)` at the precision of `z`.
pub fn li2(z: &Complex) -> Complex {
    let prec = z.prec().0;
    let work = prec + 32;
    let z = Complex::with_val(work, z);
    let out = li2_work(&z);
    Complex::with_val(prec, out)
}

fn li2_work(z: &Complex) -> Complex {
    let prec = z.prec().0;
    if z.real().is_zero() && z.imag().is_zero() {
        return Complex::new(prec);
    }
    let pi2_6 = Float::with_val(prec, pi(prec).square_ref()) / 6u32;
    let one = Complex::with_val(prec, 1);
    if *z == one {
        return Complex::with_val(prec, pi2_6);
    }
    let r = Float::with_val(prec, z.abs_ref());
    if r <= 0.5 {
        return li2_series(z);
    }
    if r > 1 {
        // Li2(z) = -Li2(1/z) - π²/6 - log²(-z)/2
        let inv = Complex::with_val(prec, z.recip_ref());
        let l = Complex::with_val(prec, Complex::with_val(prec, -z).ln_ref());
        let l2 = Complex::with_val(prec, l.square_ref()) / 2u32;
        return -li2_work(&inv) - pi2_6 - l2;
    }
    if *z.real() > 0.5 {
        // reflection Li2(z) = π²/6 - log z log(1-z) - Li2(1-z)
        let w = Complex::with_val(prec, 1 - z);
        let lz = Complex::with_val(prec, z.ln_ref());
        let lw = Complex::with_val(prec, w.ln_ref());
        let inner = if Float::with_val(prec, w.abs_ref()) <= 0.5 { li2_series(&w) } else { li2_bernoulli(&w) };
        return Complex::with_val(prec, pi2_6 - lz * lw) - inner;
    }
    li2_bernoulli(z)
}

/// Maclaurin series `Σ z^k / k²`, used for `|z| ≤ 1/2`.
fn li2_series(z: &Complex) -> Complex {
    let prec = z.prec().0;
    let eps = unit_roundoff(prec);
    let mut pw = z.clone();
    let mut sum = Complex::new(prec);
    for k in 1u64..20_000 {
        let t = Complex::with_val(prec, &pw / (k * k));
        sum += &t;
        let ta = Float::with_val(BOUND_PREC, t.abs_ref());
        let sa = Float::with_val(BOUND_PREC, sum.abs_ref());
        if ta <= Float::with_val(BOUND_PREC, &sa * &eps) {
            break;
        }
        pw *= z;
    }
    sum
}

/// `Σ B_n w^(n+1)/(n+1)!` with `w = -log(1 - z)`, valid for `|w| < 2π`;
/// used for `|z| ≤ 1`, `Re z ≤ 1/2` where `|w| < 1.8`.
fn li2_bernoulli(z: &Complex) -> Complex {
    let prec = z.prec().0;
    let one_minus = Complex::with_val(prec, 1 - z);
    let w = -Complex::with_val(prec, one_minus.ln_ref());
    let wa = Float::with_val(BOUND_PREC, w.abs_ref()).to_f64();
    let ratio = (2.0 * std::f64::consts::PI / wa.max(1e-300)).ln();
    let nmax = ((prec as f64 * std::f64::consts::LN_2) / ratio).ceil() as usize + 8;
    let b = bernoulli(nmax);
    let mut sum = Complex::new(prec);
    let mut pw = w.clone();
    let mut fact = Integer::from(1);
    for (n, bn) in b.iter().enumerate() {
        fact *= (n + 1) as u32;
        if *bn != 0 {
            let c = Float::with_val(prec, bn) / &fact;
            sum += Complex::with_val(prec, &pw * c);
        }
        pw *= &w;
    }
    sum
}

/// `Li_2(z)` with an error estimate from two working precisions.
pub fn dilog(z: &Complex, digits: u32) -> Result<Certified<Complex>, AcurveError> {
    let prec = bits_for_digits(digits);
    let a = li2(&Complex::with_val(prec + 32, z));
    let b = li2(&Complex::with_val(prec + 96, z));
    let diff = Complex::with_val(prec + 96, &a - &b);
    let err = Float::with_val(BOUND_PREC, diff.abs_ref())
        + Float::with_val(BOUND_PREC, b.abs_ref()) * unit_roundoff(prec);
    let value = Complex::with_val(prec, &b);
    let c = Certified { value, abs_err: err };
    if c.rel_err() > tol(digits) * 1000u32 && Float::with_val(BOUND_PREC, c.value.abs_ref()) > tol(digits) {
        return Err(AcurveError::Precision(short(z)));
    }
    Ok(c)
}

// ---------------------------------------------------------------------------
// Branch tracking

/// A point `(u, v)` with `A(e^v, e^u) = 0`, `v` on a continuously tracked log branch.
#[derive(Clone, Debug)]
pub struct BranchPoint {
    pub u: Complex,
    pub v: Complex,
    /// `v = Log ℓ + 2πi · winding`.
    pub winding: i64,
    pub branch_id: String,
}

impl BranchPoint {
    pub fn new(u: Complex, v: Complex, branch_id: &str) -> Self {
        let mut bp = Self { u, v, winding: 0, branch_id: branch_id.to_string() };
        bp.winding = bp.compute_winding();
        bp
    }

    fn compute_winding(&self) -> i64 {
        let prec = self.v.prec().0;
        let l = Complex::with_val(prec, self.v.exp_ref());
        let principal = Complex::with_val(prec, l.ln_ref());
        let two_pi = pi(prec) * 2u32;
        let k = Float::with_val(prec, self.v.imag() - principal.imag()) / two_pi;
        k.round().to_f64() as i64
    }

    pub fn ell(&self) -> Complex {
        Complex::with_val(self.v.prec(), self.v.exp_ref())
    }

    /// Longitude log in the `θ = -(v_θ + iπ) du` convention: `e^(v_θ) = -ℓ`.
    pub fn v_theta(&self) -> Complex {
        let prec = self.v.prec().0;
        Complex::with_val(prec, &self.v - i_pi(prec))
    }
}

/// Options for [`solve_branch`].
#[derive(Clone, Debug)]
pub struct TrackOptions {
    /// Preferred `dv/du` when the seed is a node of the curve.
    pub tangent_hint: Option<Complex>,
    /// Initial number of steps along the path.
    pub steps: usize,
    /// Relative root separation below which the path is declared ramified.
    pub ramification_tol: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self { tangent_hint: None, steps: 32, ramification_tol: 1e-9 }
    }
}

/// Figure-eight geometric branch at `u = iπ` (`ℓ = -1`). `sheet` fixes the
/// log branch `v(iπ) = (2·sheet + 1)iπ`; sheet 1 is the one on which the
/// printed closed form for `I_CS` is a θ-integral.
pub fn geometric_seed_41(prec: u32, sheet: i64) -> (BranchPoint, TrackOptions) {
    let ip = i_pi(prec);
    let v = Complex::with_val(prec, &ip * (2 * sheet + 1));
    let bp = BranchPoint::new(ip, v, "4_1/geometric");
    let hint = Complex::with_val(prec, (0, Float::with_val(prec, 12).sqrt()));
    (bp, TrackOptions { tangent_hint: Some(hint), ..TrackOptions::default() })
}

fn is_small(z: &Complex, scale: &Float, prec: u32) -> bool {
    let a = Float::with_val(BOUND_PREC, z.abs_ref());
    a <= Float::with_val(BOUND_PREC, scale * unit_roundoff(prec)) * 1_000_000u32
}

/// Tangent `dv/du` at `(u, v)`; at a node, the branch nearest `hint`.
fn tangent(a: &BivarPoly, u: &Complex, v: &Complex, hint: Option<&Complex>) -> Result<Complex, AcurveError> {
    let prec = u.prec().0;
    let j = a.jet(u, v);
    let scale = Float::with_val(BOUND_PREC, j.fu.abs_ref()) + Float::with_val(BOUND_PREC, j.fvv.abs_ref()) + 1u32;
    if !is_small(&j.fv, &scale, prec) {
        return Ok(-Complex::with_val(prec, &j.fu / &j.fv));
    }
    let hint = hint.ok_or(AcurveError::SingularSeed)?;
    // F_vv t² + 2 F_uv t + F_uu = 0
    let disc = Complex::with_val(prec, j.fuv.square_ref()) - Complex::with_val(prec, &j.fvv * &j.fuu);
    let sq = Complex::with_val(prec, disc.sqrt_ref());
    let t1 = Complex::with_val(prec, &sq - &j.fuv) / &j.fvv;
    let t2 = -Complex::with_val(prec, &j.fuv + &sq) / &j.fvv;
    let d1 = Float::with_val(BOUND_PREC, Complex::with_val(prec, &t1 - hint).abs_ref());
    let d2 = Float::with_val(BOUND_PREC, Complex::with_val(prec, &t2 - hint).abs_ref());
    Ok(if d1 <= d2 { t1 } else { t2 })
}

/// Newton in `v` on `F(u, v) = 0`.
fn newton_v(a: &BivarPoly, u: &Complex, v0: &Complex) -> Option<Complex> {
    let prec = u.prec().0;
    let mut v = v0.clone();
    let eps = unit_roundoff(prec) * 256u32;
    for _ in 0..60 {
        let j = a.jet(u, &v);
        if j.fv.real().is_zero() && j.fv.imag().is_zero() {
            return None;
        }
        let dv = Complex::with_val(prec, &j.f / &j.fv);
        v -= &dv;
        let size = Float::with_val(BOUND_PREC, v.abs_ref()) + 1u32;
        if Float::with_val(BOUND_PREC, dv.abs_ref()) <= Float::with_val(BOUND_PREC, &eps * size) {
            return Some(v);
        }
    }
    None
}

/// Distance from `ℓ` to the nearest other root of `A(·, e^u)`, relative to `|ℓ|`.
fn root_separation(a: &BivarPoly, u: &Complex, ell: &Complex) -> f64 {
    let prec = 128;
    let m = Complex::with_val(prec, Complex::with_val(prec, u).exp_ref());
    let roots = poly_roots(&a.l_coeffs(&m));
    let e = Complex::with_val(prec, ell);
    let mut d: Vec<f64> = roots
        .iter()
        .map(|r| Float::with_val(BOUND_PREC, Complex::with_val(prec, r - &e).abs_ref()).to_f64())
        .collect();
    d.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let norm = Float::with_val(BOUND_PREC, e.abs_ref()).to_f64().max(1e-300);
    d.get(1).copied().unwrap_or(f64::INFINITY) / norm
}

/// One continuation step from `from` to `u1`, subdividing as needed.
fn advance(
    a: &BivarPoly,
    from: &BranchPoint,
    u1: &Complex,
    opts: &TrackOptions,
    at_seed: bool,
) -> Result<BranchPoint, AcurveError> {
    let prec = from.u.prec().0;
    let mut cur = from.clone();
    let mut first = at_seed;
    let total = Complex::with_val(prec, u1 - &from.u);
    let mut done = Float::with_val(prec, 0);
    let mut frac = Float::with_val(prec, 1);
    let min_frac = Float::with_val(prec, 1e-14);
    while done < 1 {
        if Float::with_val(prec, &done + &frac) > 1 {
            frac = Float::with_val(prec, 1 - &done);
        }
        let h = Complex::with_val(prec, &total * &frac);
        let unext = Complex::with_val(prec, &cur.u + &h);
        let t = tangent(a, &cur.u, &cur.v, if first { opts.tangent_hint.as_ref() } else { None })?;
        let pred = Complex::with_val(prec, &cur.v + Complex::with_val(prec, &t * &h));
        let ok = newton_v(a, &unext, &pred).and_then(|v| {
            let jump = Float::with_val(BOUND_PREC, Complex::with_val(prec, &v - &pred).abs_ref()).to_f64();
            let hv = Float::with_val(BOUND_PREC, Complex::with_val(prec, &t * &h).abs_ref()).to_f64();
            let ell = Complex::with_val(prec, v.exp_ref());
            let sep = root_separation(a, &unext, &ell);
            // the corrector must stay well inside the basin of the tracked root
            (jump <= 0.25 * sep.max(1e-300) && jump <= 0.5 * hv.max(1e-3)).then_some((v, sep))
        });
        match ok {
            Some((v, sep)) => {
                if sep < opts.ramification_tol {
                    return Err(AcurveError::Ramification(short(&unext)));
                }
                let (v, _) = log_near(&Complex::with_val(prec, v.exp_ref()), &v);
                cur = BranchPoint::new(unext, v, &cur.branch_id);
                done += &frac;
                first = false;
                frac *= 2u32;
                if frac > 1 {
                    frac = Float::with_val(prec, 1);
                }
            }
            None => {
                frac /= 2u32;
                if frac < min_frac {
                    let ell = Complex::with_val(prec, cur.v.exp_ref());
                    let ahead = Complex::with_val(prec, pred.exp_ref());
                    // Newton stalls on a double root, so look for two roots near the target
                    if root_separation(a, &cur.u, &ell) < 1e-3 || root_separation(a, &unext, &ahead) < 1e-3 {
                        return Err(AcurveError::Ramification(short(&cur.u)));
                    }
                    return Err(AcurveError::StepFailure(short(&cur.u)));
                }
            }
        }
    }
    Ok(cur)
}

/// Follows the root `ℓ` of `A(ℓ, e^u)` from `seed` to `u` along a straight path.
pub fn solve_branch(
    a: &BivarPoly,
    u: &Complex,
    seed: &BranchPoint,
    opts: &TrackOptions,
) -> Result<BranchPoint, AcurveError> {
    let path = track_path(a, u, seed, opts, opts.steps.max(1))?;
    Ok(path.into_iter().last().expect("nonempty path"))
}

/// Branch values at `intervals + 1` equally spaced points from `seed.u` to `u_end`.
pub fn track_path(
    a: &BivarPoly,
    u_end: &Complex,
    seed: &BranchPoint,
    opts: &TrackOptions,
    intervals: usize,
) -> Result<Vec<BranchPoint>, AcurveError> {
    let prec = seed.u.prec().0;
    let j = a.jet(&seed.u, &seed.v);
    let scale = Float::with_val(BOUND_PREC, j.fv.abs_ref()) + Float::with_val(BOUND_PREC, j.fu.abs_ref()) + 1u32;
    if Float::with_val(BOUND_PREC, j.f.abs_ref()) > Float::with_val(BOUND_PREC, &scale * unit_roundoff(prec)) * 1_000_000u32 {
        return Err(AcurveError::SeedOffCurve(crate::num::fmt_bound(&Float::with_val(BOUND_PREC, j.f.abs_ref()))));
    }
    let span = Complex::with_val(prec, u_end - &seed.u);
    let mut out = vec![seed.clone()];
    for k in 1..=intervals {
        let uk = Complex::with_val(prec, &seed.u + Complex::with_val(prec, &span * k as u32) / intervals as u32);
        let next = advance(a, out.last().expect("seed"), &uk, opts, k == 1)?;
        out.push(next);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Figure-eight closed forms

/// `p = log x` for the root of `m³x² + (1 - m² - m⁴)x + m³ = 0` continued
/// from `p(iπ) = -2πi/3`.
pub fn p_branch_41(u: &Complex) -> Result<Complex, AcurveError> {
    let prec = u.prec().0;
    let ip = i_pi(prec);
    let mut p = Complex::with_val(prec, (0, -pi(prec) * 2u32 / 3u32));
    let span = Complex::with_val(prec, u - &ip);
    let span_abs = Float::with_val(BOUND_PREC, span.abs_ref()).to_f64();
    let steps = ((span_abs * 64.0).ceil() as usize).max(1);
    for k in 1..=steps {
        let uk = Complex::with_val(prec, &ip + Complex::with_val(prec, &span * k as u32) / steps as u32);
        let m = Complex::with_val(prec, uk.exp_ref());
        let m2 = Complex::with_val(prec, m.square_ref());
        let m3 = Complex::with_val(prec, &m2 * &m);
        let m4 = Complex::with_val(prec, m2.square_ref());
        let b = Complex::with_val(prec, 1 - &m2) - m4;
        let disc = Complex::with_val(prec, b.square_ref()) - Complex::with_val(prec, m3.square_ref()) * 4u32;
        let scale = Float::with_val(BOUND_PREC, b.abs_ref()).to_f64().powi(2) + 1.0;
        if Float::with_val(BOUND_PREC, disc.abs_ref()).to_f64() < 1e-12 * scale {
            return Err(AcurveError::Degenerate(short(&uk)));
        }
        let sq = Complex::with_val(prec, disc.sqrt_ref());
        let two_a = Complex::with_val(prec, &m3 * 2u32);
        let x1 = Complex::with_val(prec, (-b.clone() + &sq) / &two_a);
        let x2 = Complex::with_val(prec, (-b - sq) / &two_a);
        let prev = Complex::with_val(prec, p.exp_ref());
        let d1 = Float::with_val(BOUND_PREC, Complex::with_val(prec, &x1 - &prev).abs_ref());
        let d2 = Float::with_val(BOUND_PREC, Complex::with_val(prec, &x2 - &prev).abs_ref());
        let x = if d1 <= d2 { x1 } else { x2 };
        p = log_near(&x, &p).0;
    }
    Ok(p)
}

/// `I_CS(u) = 2 Li₂(e^(-p-u)) - 2 Li₂(e^(p-u)) + 8(p - iπ)(u - iπ)`.
pub fn ics_closed_41(u: &Complex) -> Result<Complex, AcurveError> {
    let prec = u.prec().0;
    let work = prec + 32;
    let u = Complex::with_val(work, u);
    let p = p_branch_41(&u)?;
    let ip = i_pi(work);
    let e1 = Complex::with_val(work, (-Complex::with_val(work, &p + &u)).exp_ref());
    let e2 = Complex::with_val(work, Complex::with_val(work, &p - &u).exp_ref());
    let lin = Complex::with_val(work, &p - &ip) * Complex::with_val(work, &u - &ip) * 8u32;
    let val = (li2(&e1) - li2(&e2)) * 2u32 + lin;
    Ok(Complex::with_val(prec, val))
}

/// Composite trapezoid values on successive halvings, Richardson-extrapolated.
fn romberg_level(values: &[Complex], span: &Complex) -> Complex {
    let prec = span.prec().0;
    let n = values.len() - 1;
    let mut s = Complex::with_val(prec, &values[0] + &values[n]) / 2u32;
    for v in &values[1..n] {
        s += v;
    }
    Complex::with_val(prec, s * span) / n as u32
}

/// `I_CS(u_end) = I_CS(iπ) + 4∫ θ` along the straight path from `iπ`, with
/// `θ = -(v_θ + iπ) du` on the branch starting at `seed`. Trapezoid sums on
/// `steps·2^k` intervals are Richardson-extrapolated until two successive
/// levels agree to `10^(-digits/2)`.
pub fn ics_path(
    a: &BivarPoly,
    u_end: &Complex,
    steps: usize,
    seed: &BranchPoint,
    opts: &TrackOptions,
    anchor: &Complex,
    digits: u32,
) -> Result<Certified<Complex>, AcurveError> {
    let prec = seed.u.prec().0;
    let span = Complex::with_val(prec, u_end - &seed.u);
    if span.real().is_zero() && span.imag().is_zero() {
        return Ok(Certified { value: anchor.clone(), abs_err: Float::new(BOUND_PREC) });
    }
    let target = tol(digits / 2);
    let ip = i_pi(prec);
    let mut table: Vec<Vec<Complex>> = Vec::new();
    let mut intervals = steps.max(2);
    let mut last_change = Float::with_val(BOUND_PREC, rug::float::Special::Infinity);
    for level in 0..14 {
        let path = track_path(a, u_end, seed, opts, intervals)?;
        let theta: Vec<Complex> = path
            .iter()
            .map(|bp| -Complex::with_val(prec, bp.v_theta() + &ip))
            .collect();
        let mut row = vec![romberg_level(&theta, &span)];
        for k in 1..=level {
            let f = Float::with_val(prec, 4).pow(k as u32) - 1u32;
            let d = Complex::with_val(prec, &row[k - 1] - &table[level - 1][k - 1]) / &f;
            row.push(Complex::with_val(prec, &row[k - 1] + d));
        }
        if level > 0 {
            let change = Complex::with_val(prec, &row[level] - &table[level - 1][level - 1]);
            last_change = Float::with_val(BOUND_PREC, change.abs_ref()) * 4u32;
            if last_change <= target && level >= 2 {
                let value = Complex::with_val(prec, anchor + Complex::with_val(prec, &row[level] * 4u32));
                return Ok(Certified { value, abs_err: last_change });
            }
        }
        table.push(row);
        intervals *= 2;
    }
    Err(AcurveError::NonConvergent(crate::num::fmt_bound(&last_change)))
}

/// `(i/2) I + 2i v Re(u) - 2πu + 2π²i = Vol + i CS`.
#[derive(Clone, Debug)]
pub struct CsVolume {
    pub u: Complex,
    pub ics: Complex,
    pub vol: Float,
    pub cs: Float,
}

impl CsVolume {
    /// `v` is the longitude log in the θ convention.
    pub fn from_ics(u: &Complex, ics: &Complex, v: &Complex) -> Self {
        let prec = ics.prec().0;
        let pi = pi(prec);
        let half_i = Complex::with_val(prec, (0, 0.5));
        let mut z = Complex::with_val(prec, &half_i * ics);
        let re_u = Float::with_val(prec, u.real());
        z += Complex::with_val(prec, v * Complex::with_val(prec, (0, 2))) * re_u;
        z -= Complex::with_val(prec, u * Float::with_val(prec, &pi * 2u32));
        z += Complex::with_val(prec, (0, Float::with_val(prec, pi.square_ref()) * 2u32));
        let (vol, cs) = z.into_real_imag();
        Self { u: u.clone(), ics: ics.clone(), vol, cs }
    }
}

fn torsion_radicand(m: &Complex) -> Complex {
    let prec = m.prec().0;
    let m2 = Complex::with_val(prec, m.square_ref());
    let m4 = Complex::with_val(prec, m2.square_ref());
    let im2 = Complex::with_val(prec, m2.recip_ref());
    let im4 = Complex::with_val(prec, m4.recip_ref());
    -im4 + im2 * 2u32 + 1u32 + m2 * 2u32 - m4
}

/// Square root of the torsion radicand continued from `√3` at `u = iπ`.
fn torsion_sqrt(u: &Complex) -> Result<Complex, AcurveError> {
    let prec = u.prec().0;
    let ip = i_pi(prec);
    let span = Complex::with_val(prec, u - &ip);
    let steps = ((Float::with_val(BOUND_PREC, span.abs_ref()).to_f64() * 64.0).ceil() as usize).max(1);
    let mut root = Complex::with_val(prec, Float::with_val(prec, 3).sqrt());
    for k in 1..=steps {
        let uk = Complex::with_val(prec, &ip + Complex::with_val(prec, &span * k as u32) / steps as u32);
        let r = torsion_radicand(&Complex::with_val(prec, uk.exp_ref()));
        if Float::with_val(BOUND_PREC, r.abs_ref()).to_f64() < 1e-12 {
            return Err(AcurveError::TorsionBranchPoint(short(&uk)));
        }
        let s = Complex::with_val(prec, r.sqrt_ref());
        let d1 = Float::with_val(BOUND_PREC, Complex::with_val(prec, &s - &root).abs_ref());
        let d2 = Float::with_val(BOUND_PREC, Complex::with_val(prec, &s + &root).abs_ref());
        root = if d1 <= d2 { s } else { -s };
    }
    Ok(root)
}

/// `T(u) = 4π² / √(-m⁻⁴ + 2m⁻² + 1 + 2m² - m⁴)`.
pub fn torsion_41(u: &Complex) -> Result<Complex, AcurveError> {
    let prec = u.prec().0;
    let four_pi2 = Float::with_val(prec, pi(prec).square_ref()) * 4u32;
    let s = torsion_sqrt(u)?;
    Ok(Complex::with_val(prec, four_pi2 / s))
}

fn bracket_poly(m: &Complex, mid: i32) -> Complex {
    // 1 - m² - 2m⁴ + mid·m⁶ - 2m⁸ - m¹⁰ + m¹²
    let prec = m.prec().0;
    let coeffs = [1, 0, -1, 0, -2, 0, mid, 0, -2, 0, -1, 0, 1];
    let mut acc = Complex::new(prec);
    for c in coeffs.iter().rev() {
        acc *= m;
        acc += *c;
    }
    acc
}

/// `S₂(u) = -i T³ / (12 (4π²)³ m⁶) · (1 - m² - 2m⁴ + 15m⁶ - 2m⁸ - m¹⁰ + m¹²)`.
pub fn s2_41(u: &Complex) -> Result<Complex, AcurveError> {
    let prec = u.prec().0;
    let t = torsion_41(u)?;
    let m = Complex::with_val(prec, u.exp_ref());
    let four_pi2 = Float::with_val(prec, pi(prec).square_ref()) * 4u32;
    let ratio = Complex::with_val(prec, &t / four_pi2);
    let r3 = Complex::with_val(prec, ratio.pow(3));
    let m6 = Complex::with_val(prec, (&m).pow(6));
    let minus_i = Complex::with_val(prec, (0, -1));
    let v = minus_i * r3 * bracket_poly(&m, 15) / (m6 * 12u32);
    Ok(Complex::with_val(prec, v))
}

/// `S₃(u) = -2 T⁶ / ((4π²)⁶ m⁶) · (1 - m² - 2m⁴ + 5m⁶ - 2m⁸ - m¹⁰ + m¹²) - 1/6`.
pub fn s3_41(u: &Complex) -> Result<Complex, AcurveError> {
    let prec = u.prec().0;
    let t = torsion_41(u)?;
    let m = Complex::with_val(prec, u.exp_ref());
    let four_pi2 = Float::with_val(prec, pi(prec).square_ref()) * 4u32;
    let ratio = Complex::with_val(prec, &t / four_pi2);
    let r6 = Complex::with_val(prec, ratio.pow(6));
    let m6 = Complex::with_val(prec, (&m).pow(6));
    let v = r6 * bracket_poly(&m, 5) * (-2i32) / m6;
    let sixth = Float::with_val(prec, 1) / 6u32;
    Ok(Complex::with_val(prec, v - sixth))
}

/// Taylor coefficients of `log(sinh ħ / ħ)` up to `ħ^order`.
pub fn log_sinhc_series(order: usize) -> Vec<Rational> {
    // f = sinh ħ/ħ = Σ ħ^(2k)/(2k+1)!; log f via f·(log f)' = f'
    let mut f = vec![Rational::new(); order + 1];
    let mut fact = Integer::from(1);
    for (n, slot) in f.iter_mut().enumerate() {
        fact *= (n + 1) as u32;
        if n % 2 == 0 {
            *slot = Rational::from((Integer::from(1), fact.clone()));
        }
    }
    let mut g = vec![Rational::new(); order + 1];
    // n g_n = n f_n - Σ_{k=1}^{n-1} k g_k f_{n-k}
    for n in 1..=order {
        let mut acc = Rational::from(&f[n] * n as u32);
        for k in 1..n {
            acc -= Rational::from(&g[k] * &f[n - k]) * k as u32;
        }
        g[n] = acc / n as u32;
    }
    g
}

/// `S̃_n` at `u = iπ` from `Σ S̃_n ħ^(n-1) = Σ S_n(iπ) ħ^(n-1) - log(sinh ħ/ħ)`, for n = 2, 3.
pub fn s_tilde_41(n: u32, prec: u32) -> Result<Complex, AcurveError> {
    let u = i_pi(prec);
    let series = log_sinhc_series(n as usize);
    let corr = Float::with_val(prec, &series[n as usize - 1]);
    let s = match n {
        2 => s2_41(&u)?,
        3 => s3_41(&u)?,
        _ => return Err(AcurveError::Precision(format!("S̃_{n} not available"))),
    };
    Ok(Complex::with_val(prec, s - corr))
}
