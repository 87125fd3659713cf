//! Arbitrary-precision helpers on top of MPFR/MPC.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

pub type BigFloat = Float;
pub type BigComplex = Complex;

/// Precision used for error bounds; only the exponent range matters there.
pub const BOUND_PREC: u32 = 64;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision in bits for `digits` decimal digits plus guard bits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * LOG2_10).ceil() as u32 + 16
}

/// Decimal digits represented by `bits` bits (rounded down).
pub fn digits_for_bits(bits: u32) -> u32 {
    (bits as f64 / LOG2_10).floor() as u32
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn i_pi(prec: u32) -> Complex {
    Complex::with_val(prec, (0, pi(prec)))
}

pub fn c64(prec: u32, re: f64, im: f64) -> Complex {
    Complex::with_val(prec, (re, im))
}

pub fn real(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

/// `10^(-digits)` as a bound-precision float.
pub fn tol(digits: u32) -> Float {
    Float::with_val(BOUND_PREC, 10).pow(-(digits as i32))
}

/// Unit roundoff `2^(1-prec)` as a bound-precision float.
pub fn unit_roundoff(prec: u32) -> Float {
    Float::with_val(BOUND_PREC, 2).pow(1 - prec as i32)
}

pub fn abs(z: &Complex) -> Float {
    Float::with_val(BOUND_PREC.max(z.prec().0), z.abs_ref())
}

/// `|z|` rounded to bound precision.
pub fn abs_bound(z: &Complex) -> Float {
    Float::with_val(BOUND_PREC, z.abs_ref())
}

/// `|a - b| / |b|`, or `|a - b|` when `b` vanishes.
pub fn rel_diff(a: &Complex, b: &Complex) -> Float {
    let prec = a.prec().0.max(b.prec().0);
    let d = Complex::with_val(prec, a - b);
    let nd = Float::with_val(prec, d.abs_ref());
    let nb = Float::with_val(prec, b.abs_ref());
    if nb.is_zero() {
        Float::with_val(BOUND_PREC, nd)
    } else {
        Float::with_val(BOUND_PREC, nd / nb)
    }
}

/// Principal logarithm shifted by `2πi k` so that it lies closest to `prev`.
pub fn log_near(z: &Complex, prev: &Complex) -> (Complex, i64) {
    let prec = z.prec().0;
    let l = Complex::with_val(prec, z.ln_ref());
    let two_pi = pi(prec) * 2u32;
    let gap = Float::with_val(prec, prev.imag() - l.imag());
    let k = Float::with_val(prec, &gap / &two_pi).round();
    let k = k.to_f64() as i64;
    let shifted = Complex::with_val(prec, (l.real(), l.imag() + two_pi * k));
    (shifted, k)
}

/// Decimal rendering with `digits` significant digits.
pub fn fmt_float(x: &Float, digits: u32) -> String {
    if x.is_zero() {
        return "0".into();
    }
    x.to_string_radix(10, Some(digits.max(1) as usize))
}

/// Rendering of an error bound with a short mantissa.
pub fn fmt_bound(x: &Float) -> String {
    if x.is_zero() {
        return "0".into();
    }
    x.to_string_radix(10, Some(3))
}

pub fn fmt_complex(z: &Complex, digits: u32) -> (String, String) {
    (fmt_float(z.real(), digits), fmt_float(z.imag(), digits))
}

/// Error bound on a value together with the value itself.
#[derive(Clone, Debug)]
pub struct Certified<T> {
    pub value: T,
    /// Absolute error bound.
    pub abs_err: Float,
}

impl Certified<Complex> {
    pub fn rel_err(&self) -> Float {
        let n = abs_bound(&self.value);
        if n.is_zero() {
            Float::with_val(BOUND_PREC, rug::float::Special::Infinity)
        } else {
            Float::with_val(BOUND_PREC, &self.abs_err / n)
        }
    }
}

/// Digits of `x` that are guaranteed by an absolute bound `err`.
pub fn certified_digits(x: &Complex, err: &Float) -> u32 {
    if err.is_zero() {
        return digits_for_bits(x.prec().0);
    }
    let n = abs_bound(x);
    if n.is_zero() {
        return 0;
    }
    let r = Float::with_val(BOUND_PREC, err / n);
    let d = -r.log10().to_f64();
    if d.is_finite() && d > 0.0 {
        d.floor() as u32
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_bit_roundtrip() {
        for d in [16u32, 32, 64, 100, 400] {
            let b = bits_for_digits(d);
            assert!(digits_for_bits(b) >= d);
        }
    }

    #[test]
    fn log_near_picks_branch() {
        let prec = 128;
        let z = c64(prec, -1.0, 1e-30);
        let prev = c64(prec, 0.0, 9.0);
        let (l, k) = log_near(&z, &prev);
        assert_eq!(k, 1);
        let want = 3.0 * std::f64::consts::PI;
        assert!((l.imag().to_f64() - want).abs() < 1e-12);
    }

    #[test]
    fn certified_digits_counts() {
        let x = c64(200, 2.0, 0.0);
        let e = Float::with_val(BOUND_PREC, 2e-40);
        assert_eq!(certified_digits(&x, &e), 40);
    }
}
