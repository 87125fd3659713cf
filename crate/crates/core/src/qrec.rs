//! q-Weyl operators acting on colored Jones sequences, and recursion search.
//!
//! `ℓ̂` shifts `J_N -> J_(N+1)` and `m̂` multiplies by `s^N`, so
//! `ℓ̂m̂ = s·m̂ℓ̂`. Operators are kept as `Σ c_(a,b)(s) m̂^b ℓ̂^a`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acurve::BivarPoly;
use crate::cjones::{colored_jones_unknot, habiro_41};
use crate::laurent::LaurentHalf;

#[derive(Debug, Error, PartialEq)]
pub enum QrecError {
    #[error("index N = {n} needs J_{need}, sequence stops at {max}")]
    OutOfRange { n: i64, need: i64, max: usize },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("result at N = {0} is not a Laurent polynomial")]
    NotPolynomial(i64),
    #[error("J_1 must be 1")]
    Normalization,
    #[error("underdetermined: {rows} independent constraints for {unknowns} unknowns")]
    Underdetermined { rows: usize, unknowns: usize },
    #[error("operator fits the window but fails at held-out N = {0}")]
    HeldOut(i64),
    #[error("modular reconstruction did not stabilise")]
    Reconstruction,
    #[error("coefficient of m^{b} l^{a} has a pole at s = 1")]
    PoleAtOne { a: u32, b: u32 },
}

// ---------------------------------------------------------------------------
// Rational functions of s

/// `num / den` with Laurent polynomial numerator and denominator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatFn {
    pub num: LaurentHalf,
    pub den: LaurentHalf,
}

impl RatFn {
    pub fn new(num: LaurentHalf, den: LaurentHalf) -> Result<Self, QrecError> {
        if den.is_zero() {
            return Err(QrecError::ZeroDenominator);
        }
        Ok(Self { num, den }.tidy())
    }

    pub fn poly(p: LaurentHalf) -> Self {
        Self { num: p, den: LaurentHalf::one() }
    }

    pub fn int(c: i64) -> Self {
        Self::poly(LaurentHalf::monomial(0, c))
    }

    pub fn s_pow(k: i64) -> Self {
        Self::poly(LaurentHalf::monomial(k, 1))
    }

    pub fn zero() -> Self {
        Self::poly(LaurentHalf::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Folds an exactly dividing denominator into the numerator.
    fn tidy(self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        if self.den != LaurentHalf::one() {
            if let Some(q) = self.num.div_exact(&self.den) {
                return Self::poly(q);
            }
        }
        self
    }

    pub fn as_poly(&self) -> Option<LaurentHalf> {
        self.num.div_exact(&self.den)
    }

    /// Value at `s = 1`, cancelling common `(s - 1)` factors first.
    pub fn at_one(&self) -> Option<Rational> {
        let s_minus_1 = LaurentHalf::from_pairs([(1, 1), (0, -1)]);
        let (mut n, mut d) = (self.num.clone(), self.den.clone());
        loop {
            let dv = sum_coeffs(&d);
            if dv != 0 {
                return Some(Rational::from((sum_coeffs(&n), dv)));
            }
            match (n.div_exact(&s_minus_1), d.div_exact(&s_minus_1)) {
                (Some(n2), Some(d2)) if !n.is_zero() => {
                    n = n2;
                    d = d2;
                }
                (_, _) if n.is_zero() => return Some(Rational::new()),
                _ => return None,
            }
        }
    }
}

fn sum_coeffs(p: &LaurentHalf) -> Integer {
    p.terms().map(|(_, c)| c.clone()).sum()
}

impl PartialEq for RatFn {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl std::ops::Add for &RatFn {
    type Output = RatFn;
    fn add(self, rhs: &RatFn) -> RatFn {
        if self.den == rhs.den {
            return RatFn { num: &self.num + &rhs.num, den: self.den.clone() }.tidy();
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFn { num, den: &self.den * &rhs.den }.tidy()
    }
}

impl std::ops::Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn { num: -&self.num, den: self.den.clone() }
    }
}

impl std::ops::Mul for &RatFn {
    type Output = RatFn;
    fn mul(self, rhs: &RatFn) -> RatFn {
        RatFn { num: &self.num * &rhs.num, den: &self.den * &rhs.den }.tidy()
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == LaurentHalf::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

// ---------------------------------------------------------------------------
// Operators

/// `Σ c_(a,b)(s) m̂^b ℓ̂^a`, keyed by `(a, b)`; zero coefficients are dropped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QWeylOp {
    terms: BTreeMap<(u32, u32), RatFn>,
}

/// Generator of the q-Weyl algebra, for building operators from words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gen {
    L,
    M,
}

impl QWeylOp {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::term(RatFn::int(1), 0, 0)
    }

    /// `c · m̂^b ℓ̂^a`.
    pub fn term(c: RatFn, a: u32, b: u32) -> Self {
        let mut op = Self::zero();
        op.add_term(a, b, c);
        op
    }

    pub fn ell() -> Self {
        Self::term(RatFn::int(1), 1, 0)
    }

    pub fn m() -> Self {
        Self::term(RatFn::int(1), 0, 1)
    }

    pub fn scalar(c: RatFn) -> Self {
        Self::term(c, 0, 0)
    }

    /// Product of generators in the given order, normal-ordered.
    pub fn from_word(word: &[Gen]) -> Self {
        word.iter().fold(Self::one(), |acc, g| {
            let x = match g {
                Gen::L => Self::ell(),
                Gen::M => Self::m(),
            };
            &acc * &x
        })
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: RatFn) {
        let entry = self.terms.entry((a, b)).or_insert_with(RatFn::zero);
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(coefficient, a, b)` for each term `c · m̂^b ℓ̂^a`, canonically ordered.
    pub fn terms(&self) -> impl Iterator<Item = (&RatFn, u32, u32)> {
        self.terms.iter().map(|(&(a, b), c)| (c, a, b))
    }

    pub fn order(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn m_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }
}

impl std::ops::Add for &QWeylOp {
    type Output = QWeylOp;
    fn add(self, rhs: &QWeylOp) -> QWeylOp {
        let mut out = self.clone();
        for (&(a, b), c) in &rhs.terms {
            out.add_term(a, b, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &QWeylOp {
    type Output = QWeylOp;
    fn sub(self, rhs: &QWeylOp) -> QWeylOp {
        let mut out = self.clone();
        for (&(a, b), c) in &rhs.terms {
            out.add_term(a, b, -c);
        }
        out
    }
}

impl std::ops::Mul for &QWeylOp {
    type Output = QWeylOp;
    /// `m̂^b1 ℓ̂^a1 · m̂^b2 ℓ̂^a2 = s^(a1·b2) m̂^(b1+b2) ℓ̂^(a1+a2)`.
    fn mul(self, rhs: &QWeylOp) -> QWeylOp {
        let mut out = QWeylOp::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                let c = &(c1 * c2) * &RatFn::s_pow(a1 as i64 * b2 as i64);
                out.add_term(a1 + a2, b1 + b2, c);
            }
        }
        out
    }
}

impl fmt::Display for QWeylOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(c, a, b)| {
                let mut s = format!("({c})");
                if b > 0 {
                    s.push_str(&format!("*M^{b}"));
                }
                if a > 0 {
                    s.push_str(&format!("*L^{a}"));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Serialized form: one entry per term.
#[derive(Serialize, Deserialize)]
struct OpTerm {
    num: LaurentHalf,
    den: LaurentHalf,
    a: u32,
    b: u32,
}

impl Serialize for QWeylOp {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<OpTerm> = self
            .terms()
            .map(|(c, a, b)| OpTerm { num: c.num.clone(), den: c.den.clone(), a, b })
            .collect();
        rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for QWeylOp {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let rows: Vec<OpTerm> = Vec::deserialize(de)?;
        let mut op = QWeylOp::zero();
        for r in rows {
            let c = RatFn::new(r.num, r.den).map_err(serde::de::Error::custom)?;
            op.add_term(r.a, r.b, c);
        }
        Ok(op)
    }
}

// ---------------------------------------------------------------------------
// Sequences

#[derive(Clone, Debug)]
pub struct JSequence {
    pub knot: String,
    /// `values[N - 1] = J_N`.
    values: Vec<LaurentHalf>,
}

impl JSequence {
    pub fn new(knot: &str, values: Vec<LaurentHalf>) -> Result<Self, QrecError> {
        if values.first() != Some(&LaurentHalf::one()) {
            return Err(QrecError::Normalization);
        }
        Ok(Self { knot: knot.to_string(), values })
    }

    pub fn unknot(max_n: u32) -> Self {
        Self { knot: "unknot".into(), values: (1..=max_n).map(colored_jones_unknot).collect() }
    }

    pub fn figure_eight(max_n: u32) -> Self {
        Self { knot: "4_1".into(), values: (1..=max_n).map(habiro_41).collect() }
    }

    /// The identically zero sequence; exempt from `J_1 = 1`.
    pub fn zero(max_n: u32) -> Self {
        Self { knot: "zero".into(), values: vec![LaurentHalf::zero(); max_n as usize] }
    }

    pub fn max_n(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, n: i64) -> Option<&LaurentHalf> {
        if n < 1 {
            return None;
        }
        self.values.get(n as usize - 1)
    }
}

/// `(op J)_N = Σ c_(a,b)(s) s^(bN) J_(N+a)`.
pub fn apply(op: &QWeylOp, seq: &JSequence, n: i64) -> Result<LaurentHalf, QrecError> {
    let mut acc = RatFn::zero();
    for (c, a, b) in op.terms() {
        let need = n + a as i64;
        let j = seq
            .get(need)
            .ok_or(QrecError::OutOfRange { n, need, max: seq.max_n() })?;
        let t = RatFn::poly(j.shift(b as i64 * n));
        acc = &acc + &(c * &t);
    }
    acc.as_poly().ok_or(QrecError::NotPolynomial(n))
}

/// `s = 1`, `ℓ̂ -> ℓ`, `m̂ -> m`, with rational denominators and integer
/// content cleared and a positive leading coefficient.
pub fn classical_limit(op: &QWeylOp) -> Result<BivarPoly, QrecError> {
    let mut vals = Vec::new();
    for (c, a, b) in op.terms() {
        let v = c.at_one().ok_or(QrecError::PoleAtOne { a, b })?;
        if v != 0 {
            vals.push((v, a, b));
        }
    }
    let mut lcm = Integer::from(1);
    for (v, _, _) in &vals {
        lcm.lcm_mut(v.denom());
    }
    let ints: Vec<(Integer, u32, u32)> = vals
        .into_iter()
        .map(|(v, a, b)| ((v * &lcm).into_numer_denom().0, a, b))
        .collect();
    let mut g = Integer::new();
    for (c, _, _) in &ints {
        g.gcd_mut(c);
    }
    let mut p = BivarPoly::default();
    for (c, a, b) in ints {
        p.add_term(a, b, c.div_exact(&g));
    }
    if let Some((c, _, _)) = p.terms().last() {
        if *c < 0 {
            p = &BivarPoly::default() - &p;
        }
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// Recursion discovery

#[derive(Clone, Debug)]
pub struct RecursionOptions {
    /// Highest power of `ℓ̂`.
    pub order: u32,
    /// Highest power of `m̂` in each coefficient.
    pub coeff_degree: u32,
    /// Highest power of `s` in each coefficient; searched when `None`.
    pub s_degree: Option<u32>,
    /// Ceiling for the `s`-degree search.
    pub max_s_degree: u32,
    /// Allow a right-hand side `T(s)` constant in `N`.
    pub inhomogeneous: bool,
    /// Indices kept out of the fit window, counted from the top.
    pub holdout: usize,
    pub seed: u64,
}

impl Default for RecursionOptions {
    fn default() -> Self {
        Self {
            order: 3,
            coeff_degree: 14,
            s_degree: None,
            max_s_degree: 40,
            inhomogeneous: false,
            holdout: 6,
            seed: 0x51_7e_c0_de,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Recursion {
    pub op: QWeylOp,
    /// `op J = rhs` for inhomogeneous relations.
    pub rhs: Option<LaurentHalf>,
    pub s_degree: u32,
    pub fit_window: Vec<i64>,
    pub held_out: Vec<i64>,
}

/// Primes below 2^31, so products of residues fit in `u64`.
const PRIMES: [u64; 10] = [
    2147483647, 2147483629, 2147483587, 2147483579, 2147483563, 2147483549, 2147483543, 2147483497, 2147483489,
    2147483477,
];

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn inv(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

fn spow(sigma: u64, e: i64, p: u64) -> u64 {
    if e >= 0 {
        powmod(sigma, e as u64, p)
    } else {
        powmod(inv(sigma, p), (-e) as u64, p)
    }
}

fn eval_mod(poly: &LaurentHalf, sigma: u64, p: u64) -> u64 {
    let mut acc = 0;
    for (e, c) in poly.terms() {
        let c = c.mod_u(p as u32) as u64;
        acc = (acc + mulmod(c, spow(sigma, e, p), p)) % p;
    }
    acc
}

struct System<'a> {
    seq: &'a JSequence,
    order: u32,
    deg: u32,
    d: u32,
    inhom: bool,
    window: Vec<i64>,
}

impl System<'_> {
    fn cols(&self) -> usize {
        let per = (self.d + 1) as usize;
        (self.order as usize + 1) * (self.deg as usize + 1) * per + if self.inhom { per } else { 0 }
    }

    fn col(&self, a: u32, b: u32, k: u32) -> usize {
        ((a * (self.deg + 1) + b) * (self.d + 1) + k) as usize
    }

    /// Number of coefficients of the `s`-polynomial identity at index `n`.
    fn span(&self, n: i64) -> usize {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for a in 0..=self.order {
            let j = self.seq.get(n + a as i64).expect("index checked");
            if let (Some(jl), Some(jh)) = (j.min_exp(), j.max_exp()) {
                lo = lo.min(jl);
                hi = hi.max(jh + self.deg as i64 * n + self.d as i64);
            }
        }
        if self.inhom {
            lo = lo.min(0);
            hi = hi.max(self.d as i64);
        }
        if lo > hi {
            0
        } else {
            (hi - lo + 1) as usize
        }
    }

    /// Evaluation points per index; `None` when there are fewer constraints than unknowns.
    fn quotas(&self) -> Result<Vec<usize>, QrecError> {
        let cols = self.cols();
        let caps: Vec<usize> = self.window.iter().map(|&n| self.span(n)).collect();
        let total: usize = caps.iter().sum();
        let want = cols + 24;
        if total < cols {
            return Err(QrecError::Underdetermined { rows: total, unknowns: cols });
        }
        let mut q = vec![0usize; caps.len()];
        let mut left = want.min(total);
        while left > 0 {
            let open = caps.iter().zip(&q).filter(|(c, q)| q < c).count();
            let share = left.div_ceil(open.max(1));
            for (qi, ci) in q.iter_mut().zip(&caps) {
                let take = share.min(ci - *qi).min(left);
                *qi += take;
                left -= take;
            }
        }
        Ok(q)
    }

    fn rows(&self, p: u64, quotas: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<u64>> {
        let cols = self.cols();
        let mut out = Vec::new();
        for (&n, &quota) in self.window.iter().zip(quotas) {
            let js: Vec<&LaurentHalf> = (0..=self.order).map(|a| self.seq.get(n + a as i64).expect("index")).collect();
            for _ in 0..quota {
                let sigma = rng.gen_range(2..p - 1);
                let mut row = vec![0u64; cols];
                let sn = spow(sigma, n, p);
                for (a, j) in js.iter().enumerate() {
                    let mut base = eval_mod(j, sigma, p);
                    for b in 0..=self.deg {
                        let mut v = base;
                        for k in 0..=self.d {
                            row[self.col(a as u32, b, k)] = v;
                            v = mulmod(v, sigma, p);
                        }
                        base = mulmod(base, sn, p);
                    }
                }
                if self.inhom {
                    let off = cols - (self.d as usize + 1);
                    let mut v = p - 1;
                    for k in 0..=self.d as usize {
                        row[off + k] = v;
                        v = mulmod(v, sigma, p);
                    }
                }
                out.push(row);
            }
        }
        out
    }
}

/// Echelon form mod `p`; returns the nullspace vector attached to the first
/// free column (the reduced-echelon basis vector, independent of `p` for
/// good primes) and the list of free columns.
fn nullspace_first(mut m: Vec<Vec<u64>>, cols: usize, p: u64) -> (Vec<usize>, Option<Vec<u64>>) {
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, pr);
        let iv = inv(m[r][c], p);
        for x in m[r][c..].iter_mut() {
            *x = mulmod(*x, iv, p);
        }
        let (top, rest) = m.split_at_mut(r + 1);
        let prow = &top[r];
        for row in rest.iter_mut() {
            let f = row[c];
            if f == 0 {
                continue;
            }
            let f = p - f;
            for (x, y) in row[c..].iter_mut().zip(&prow[c..]) {
                *x = (*x + f * *y) % p;
            }
        }
        pivots.push((r, c));
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|x| x.1).collect();
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let Some(&f) = free.first() else { return (free, None) };
    let mut x = vec![0u64; cols];
    x[f] = 1;
    for &(row, c) in pivots.iter().rev() {
        let mut s = 0u64;
        for j in c + 1..cols {
            if x[j] != 0 && m[row][j] != 0 {
                s = (s + mulmod(m[row][j], x[j], p)) % p;
            }
        }
        x[c] = (p - s) % p;
    }
    (free, Some(x))
}

/// `r / t ≡ a (mod m)` with `|r|, |t| ≤ sqrt(m/2)`.
fn rational_reconstruct(a: &Integer, m: &Integer) -> Option<Rational> {
    let bound = Integer::from(m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.clone());
    let (mut t0, mut t1) = (Integer::new(), Integer::from(1));
    while r1 > bound {
        let q = Integer::from(&r0 / &r1);
        let r2 = Integer::from(&r0 - &q * &r1);
        let t2 = Integer::from(&t0 - &q * &t1);
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1 == 0 || Integer::from(t1.abs_ref()) > bound {
        return None;
    }
    let g = Integer::from(r1.gcd_ref(&t1));
    if g != 1 {
        return None;
    }
    Some(Rational::from((r1, t1)))
}

fn nullspace_exists(sys: &System, seed: u64) -> Result<bool, QrecError> {
    let quotas = sys.quotas()?;
    let p = PRIMES[0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ sys.d as u64);
    let rows = sys.rows(p, &quotas, &mut rng);
    Ok(nullspace_first(rows, sys.cols(), p).1.is_some())
}

fn build_op(sys: &System, v: &[Integer]) -> (QWeylOp, Option<LaurentHalf>) {
    let mut op = QWeylOp::zero();
    for a in 0..=sys.order {
        for b in 0..=sys.deg {
            let poly = LaurentHalf::from_pairs((0..=sys.d).map(|k| (k as i64, v[sys.col(a, b, k)].clone())));
            if !poly.is_zero() {
                op.add_term(a, b, RatFn::poly(poly));
            }
        }
    }
    let rhs = sys.inhom.then(|| {
        let off = sys.cols() - (sys.d as usize + 1);
        LaurentHalf::from_pairs((0..=sys.d as usize).map(|k| (k as i64, v[off + k].clone())))
    });
    (op, rhs)
}

fn annihilates(op: &QWeylOp, rhs: &Option<LaurentHalf>, seq: &JSequence, n: i64) -> Result<bool, QrecError> {
    let v = apply(op, seq, n)?;
    Ok(match rhs {
        Some(t) => &v - t == LaurentHalf::zero(),
        None => v.is_zero(),
    })
}

/// Searches for `Σ_(a ≤ order, b ≤ coeff_degree) c_(a,b)(s) m̂^b ℓ̂^a` with
/// polynomial coefficients in `s` annihilating the sequence on the fit
/// window. Candidates come from nullspaces modulo word-sized primes
/// evaluated at random `s`, lifted by Chinese remaindering and rational
/// reconstruction, and are then checked exactly, held-out indices included.
pub fn discover_recursion(seq: &JSequence, opts: &RecursionOptions) -> Result<Option<Recursion>, QrecError> {
    let last = seq.max_n() as i64 - opts.order as i64;
    if last < 1 {
        return Err(QrecError::OutOfRange { n: 1, need: 1 + opts.order as i64, max: seq.max_n() });
    }
    let all: Vec<i64> = (1..=last).collect();
    let split = all.len().saturating_sub(opts.holdout).max(1);
    let (window, held) = all.split_at(split);
    if seq.values.iter().all(LaurentHalf::is_zero) {
        return Ok(Some(Recursion {
            op: QWeylOp::one(),
            rhs: None,
            s_degree: 0,
            fit_window: window.to_vec(),
            held_out: held.to_vec(),
        }));
    }
    let mk = |d: u32| System {
        seq,
        order: opts.order,
        deg: opts.coeff_degree,
        d,
        inhom: opts.inhomogeneous,
        window: window.to_vec(),
    };
    let d = match opts.s_degree {
        Some(d) => d,
        None => {
            // doubling, then bisection on the smallest degree with a solution
            let mut lo = 0u32;
            let mut hi = None;
            let mut probe = 0u32;
            while probe <= opts.max_s_degree {
                if nullspace_exists(&mk(probe), opts.seed)? {
                    hi = Some(probe);
                    break;
                }
                lo = probe + 1;
                probe = if probe == 0 { 1 } else { (probe * 2).min(opts.max_s_degree.max(probe + 1)) };
            }
            let Some(mut hi) = hi else { return Ok(None) };
            while lo < hi {
                let mid = (lo + hi) / 2;
                if nullspace_exists(&mk(mid), opts.seed)? {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            hi
        }
    };
    let sys = mk(d);
    let quotas = sys.quotas()?;
    let cols = sys.cols();
    let mut modulus = Integer::from(1);
    let mut acc: Vec<Integer> = vec![Integer::new(); cols];
    let mut free_ref: Option<Vec<usize>> = None;
    let mut found_any = false;
    for (i, &p) in PRIMES.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64));
        let (free, vec) = nullspace_first(sys.rows(p, &quotas, &mut rng), cols, p);
        let Some(vec) = vec else { continue };
        found_any = true;
        match &free_ref {
            None => free_ref = Some(free),
            Some(f) if *f != free => continue,
            _ => {}
        }
        // CRT: acc ≡ old (mod modulus), acc ≡ vec (mod p)
        let pz = Integer::from(p);
        let minv = Integer::from(&modulus % &pz).invert(&pz).expect("coprime moduli");
        for (x, &r) in acc.iter_mut().zip(&vec) {
            let diff = (Integer::from(r) - &*x) % &pz;
            let t = (diff * &minv) % &pz;
            let t = if t < 0 { t + &pz } else { t };
            *x += &modulus * t;
        }
        modulus *= &pz;
        let Some(rats) = acc.iter().map(|x| rational_reconstruct(x, &modulus)).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let mut lcm = Integer::from(1);
        for r in &rats {
            lcm.lcm_mut(r.denom());
        }
        let mut ints: Vec<Integer> = rats.iter().map(|r| Rational::from(r * &lcm).into_numer_denom().0).collect();
        let mut g = Integer::new();
        for x in &ints {
            g.gcd_mut(x);
        }
        for x in &mut ints {
            *x = Integer::from(x.div_exact_ref(&g));
        }
        let (op, rhs) = build_op(&sys, &ints);
        let mut fits = true;
        for &n in window {
            if !annihilates(&op, &rhs, seq, n)? {
                fits = false;
                break;
            }
        }
        if !fits {
            continue;
        }
        for &n in held {
            if !annihilates(&op, &rhs, seq, n)? {
                return Err(QrecError::HeldOut(n));
            }
        }
        return Ok(Some(Recursion { op, rhs, s_degree: d, fit_window: window.to_vec(), held_out: held.to_vec() }));
    }
    if found_any {
        Err(QrecError::Reconstruction)
    } else {
        Ok(None)
    }
}
