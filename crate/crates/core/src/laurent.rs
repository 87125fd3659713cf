//! Exact Laurent polynomials in `s = q^(1/2)` with big-integer coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::ops::Pow;
use rug::{Complex, Float, Integer};
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde::{Deserialize, Deserializer};

use crate::num::BOUND_PREC;

/// Laurent polynomial `Σ c_e s^e`. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentHalf {
    terms: BTreeMap<i64, Integer>,
}

impl LaurentHalf {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    /// `c · s^e`.
    pub fn monomial(e: i64, c: impl Into<Integer>) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c.into());
        p
    }

    /// `s + s^-1`, the value on the unknot.
    pub fn unknot() -> Self {
        Self::from_pairs([(1, 1), (-1, 1)])
    }

    pub fn from_pairs<I, C>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<Integer>,
    {
        let mut p = Self::zero();
        for (e, c) in pairs {
            p.add_term(e, c.into());
        }
        p
    }

    /// Dense coefficients starting at `s^offset`.
    pub fn from_dense(offset: i64, coeffs: &[i64]) -> Self {
        Self::from_pairs(coeffs.iter().enumerate().map(|(k, &c)| (offset + k as i64, c)))
    }

    pub fn add_term(&mut self, e: i64, c: Integer) {
        if c == 0 {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v += c;
                if *v == 0 {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i64) -> Integer {
        self.terms.get(&e).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &Integer)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Multiplication by `s^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Integer) -> Self {
        if *c == 0 {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, v)| (*e, Integer::from(v * c))).collect(),
        }
    }

    /// `s -> s^-1`, which is the effect of mirroring a knot.
    pub fn mirror(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    /// `s -> s^k`.
    pub fn substitute_power(&self, k: i64) -> Self {
        assert!(k != 0);
        Self {
            terms: self.terms.iter().map(|(e, c)| (e * k, c.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Parity of every exponent, or `None` if the exponents are mixed.
    pub fn parity(&self) -> Option<i64> {
        let mut it = self.terms.keys();
        let p = it.next()?.rem_euclid(2);
        it.all(|e| e.rem_euclid(2) == p).then_some(p)
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.mirror()
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let dmax = d.max_exp()?;
        let dmin = d.min_exp()?;
        let lead = d.terms[&dmax].clone();
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(rmax) = rem.max_exp() {
            if rmax - dmax < rem.min_exp()? - dmin {
                return None;
            }
            let rc = rem.terms[&rmax].clone();
            if !rc.is_divisible(&lead) {
                return None;
            }
            let qc = Integer::from(rc.div_exact_ref(&lead));
            let qe = rmax - dmax;
            rem = &rem - &d.shift(qe).scale(&qc);
            quot.add_term(qe, qc);
        }
        Some(quot)
    }

    /// Evaluates at a complex `s`.
    pub fn eval(&self, s: &Complex) -> Complex {
        self.eval_with_bound(s).0
    }

    /// Horner evaluation with a running absolute error bound.
    pub fn eval_with_bound(&self, s: &Complex) -> (Complex, Float) {
        let prec = s.prec().0;
        let (Some(lo), Some(hi)) = (self.min_exp(), self.max_exp()) else {
            return (Complex::new(prec), Float::new(BOUND_PREC));
        };
        let mut acc = Complex::new(prec);
        let mut mag = Float::new(BOUND_PREC);
        let sabs = Float::with_val(BOUND_PREC, s.abs_ref());
        for e in (lo..=hi).rev() {
            acc *= s;
            mag *= &sabs;
            if let Some(c) = self.terms.get(&e) {
                acc += c;
                mag += Float::with_val(BOUND_PREC, c).abs();
            }
        }
        let scale = Complex::with_val(prec, s.pow(lo as i32));
        acc *= &scale;
        let sabs_lo = Float::with_val(BOUND_PREC, scale.abs_ref());
        mag *= sabs_lo;
        let ops = (hi - lo + 4) as f64 * 4.0;
        let u = crate::num::unit_roundoff(prec);
        let bound = mag * u * ops;
        (acc, bound)
    }

    /// Coefficient of `s^e` in units of `q = s^2` rendered as a reduced fraction.
    pub fn q_exponent_label(e: i64) -> String {
        if e % 2 == 0 {
            format!("{}", e / 2)
        } else {
            format!("{}/2", e)
        }
    }

    /// Pairs `(q-exponent label, coefficient)` sorted by descending exponent.
    pub fn q_pairs(&self) -> Vec<(String, Integer)> {
        self.terms
            .iter()
            .rev()
            .map(|(e, c)| (Self::q_exponent_label(*e), c.clone()))
            .collect()
    }
}

impl fmt::Display for LaurentHalf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = *c < 0;
            let a = Integer::from(c.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match *e {
                0 => write!(f, "{a}")?,
                _ => {
                    if a != 1 {
                        write!(f, "{a}*")?;
                    }
                    if *e == 1 {
                        write!(f, "s")?;
                    } else {
                        write!(f, "s^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn add_maps(a: &LaurentHalf, b: &LaurentHalf, sign: i32) -> LaurentHalf {
    let mut out = a.clone();
    for (e, c) in &b.terms {
        let c = if sign < 0 { Integer::from(-c) } else { c.clone() };
        out.add_term(*e, c);
    }
    out
}

impl Add for &LaurentHalf {
    type Output = LaurentHalf;
    fn add(self, rhs: &LaurentHalf) -> LaurentHalf {
        add_maps(self, rhs, 1)
    }
}

impl Sub for &LaurentHalf {
    type Output = LaurentHalf;
    fn sub(self, rhs: &LaurentHalf) -> LaurentHalf {
        add_maps(self, rhs, -1)
    }
}

impl Neg for &LaurentHalf {
    type Output = LaurentHalf;
    fn neg(self) -> LaurentHalf {
        LaurentHalf {
            terms: self.terms.iter().map(|(e, c)| (*e, Integer::from(-c))).collect(),
        }
    }
}

impl Mul for &LaurentHalf {
    type Output = LaurentHalf;
    fn mul(self, rhs: &LaurentHalf) -> LaurentHalf {
        let mut out = LaurentHalf::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, Integer::from(ca * cb));
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentHalf {
            type Output = LaurentHalf;
            fn $m(self, rhs: LaurentHalf) -> LaurentHalf {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Serialized as a map from `s`-exponent to coefficient, highest exponent first.
impl Serialize for LaurentHalf {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut m = ser.serialize_map(Some(self.terms.len()))?;
        for (e, c) in self.terms.iter().rev() {
            match c.to_i64() {
                Some(v) => m.serialize_entry(&e.to_string(), &v)?,
                None => m.serialize_entry(&e.to_string(), &c.to_string())?,
            }
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for LaurentHalf {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw: BTreeMap<String, serde_json::Value> = BTreeMap::deserialize(de)?;
        let mut p = LaurentHalf::zero();
        for (k, v) in raw {
            let e: i64 = k.parse().map_err(D::Error::custom)?;
            let c = match v {
                serde_json::Value::Number(n) => {
                    Integer::from(n.as_i64().ok_or_else(|| D::Error::custom("non-integer coefficient"))?)
                }
                serde_json::Value::String(s) => s.parse::<Integer>().map_err(D::Error::custom)?,
                _ => return Err(D::Error::custom("coefficient must be an integer")),
            };
            p.add_term(e, c);
        }
        Ok(p)
    }
}
