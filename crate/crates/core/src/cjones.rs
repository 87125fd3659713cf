//! Colored Jones polynomials and the Kashaev invariant.
//!
//! Numeric sums run at twice the requested digits and carry a running
//! absolute error bound; a result is returned only if its relative error is
//! below `10^(-digits/2)`.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer};
use thiserror::Error;

use crate::knotcore::{self, KnotError, PlanarDiagram};
use crate::laurent::LaurentHalf;
use crate::num::{bits_for_digits, tol, unit_roundoff, Certified, BOUND_PREC};

#[derive(Debug, Error)]
pub enum CjonesError {
    #[error(transparent)]
    Knot(#[from] KnotError),
    #[error("color N = {0} is not supported here")]
    Color(u32),
    #[error("precision exhausted: relative error {rel_err} exceeds the {digits}-digit target")]
    Precision { digits: u32, rel_err: String },
    #[error("{0}")]
    Input(String),
}

/// `(x)_m = (1 - x)(1 - x^2)...(1 - x^m)`.
#[derive(Clone, Debug)]
pub struct QPochhammer {
    pub x: Complex,
    pub m: u32,
    pub value: Complex,
}

impl QPochhammer {
    pub fn new(x: &Complex, m: u32) -> Self {
        let prec = x.prec().0;
        let mut value = Complex::with_val(prec, 1);
        let mut pow = Complex::with_val(prec, 1);
        for _ in 0..m {
            pow *= x;
            value *= Complex::with_val(prec, 1 - &pow);
        }
        Self { x: x.clone(), m, value }
    }

    /// `(x)_{m+1}` from `(x)_m`.
    pub fn next(&self) -> Self {
        let prec = self.x.prec().0;
        let pow = Complex::with_val(prec, (&self.x).pow(self.m + 1));
        let value = Complex::with_val(prec, &self.value * Complex::with_val(prec, 1 - pow));
        Self { x: self.x.clone(), m: self.m + 1, value }
    }
}

/// Evaluation point `q = e^(2ħ)` with `ħ = u/N`.
#[derive(Clone, Debug)]
pub struct EvalPoint {
    pub n: u32,
    pub hbar: Complex,
    pub u: Complex,
    /// Integer level `k` when `u = iπN/k` exactly.
    pub k: Option<i64>,
}

impl EvalPoint {
    pub fn from_u(u: &Complex, n: u32) -> Self {
        let hbar = Complex::with_val(u.prec(), u / n);
        Self { n, hbar, u: u.clone(), k: None }
    }

    /// `q = e^(2πi/k)`, so `u = iπN/k`.
    pub fn at_level(n: u32, k: i64, prec: u32) -> Self {
        let pi = Float::with_val(prec, Constant::Pi);
        let u = Complex::with_val(prec, (0, pi * n / k));
        let hbar = Complex::with_val(prec, &u / n);
        Self { n, hbar, u, k: Some(k) }
    }

    pub fn q(&self) -> Complex {
        let two_h = Complex::with_val(self.hbar.prec(), &self.hbar * 2u32);
        Complex::with_val(self.hbar.prec(), two_h.exp_ref())
    }
}

/// Quantum integer `[N] = (s^N - s^-N)/(s - s^-1)`.
pub fn colored_jones_unknot(n: u32) -> LaurentHalf {
    let n = n as i64;
    LaurentHalf::from_pairs((0..n).map(|k| (n - 1 - 2 * k, 1)))
}

/// `J_1 = 1`, `J_2 = J`, `J_3 = J(K^2) - 1` from the cabling rules.
pub fn colored_jones_by_cabling(k: &PlanarDiagram, n: u32) -> Result<LaurentHalf, CjonesError> {
    match n {
        1 => Ok(LaurentHalf::one()),
        2 => Ok(knotcore::jones(k)?),
        3 => {
            let c = k.cable(2)?;
            Ok(&knotcore::jones(&c)? - &LaurentHalf::one())
        }
        _ => Err(CjonesError::Color(n)),
    }
}

/// `J_4 = J(K^3) - 2J(K)`. The 3-cable usually exceeds the crossing budget,
/// so this goes through the bracket with an explicit larger budget.
pub fn colored_jones_4_by_cabling(k: &PlanarDiagram, budget: usize) -> Result<LaurentHalf, CjonesError> {
    let c = k.cable_with_budget(3, budget)?;
    let j3 = knotcore::jones_with_budget(&c, budget)?;
    Ok(&j3 - &knotcore::jones(k)?.scale(&Integer::from(2)))
}

/// Figure-eight colored Jones from the cyclotomic sum
/// `[N] Σ_j q^(Nj) Π_{k=1..j} (1 - q^(k-N))(1 - q^(-k-N))`.
pub fn habiro_41(n: u32) -> LaurentHalf {
    assert!(n >= 1, "N must be positive");
    let n = n as i64;
    let one = LaurentHalf::one();
    let mut sum = LaurentHalf::zero();
    let mut prod = LaurentHalf::one();
    for j in 0..n {
        if j > 0 {
            let a = &one - &LaurentHalf::monomial(2 * (j - n), 1);
            let b = &one - &LaurentHalf::monomial(2 * (-j - n), 1);
            prod = &prod * &(&a * &b);
        }
        sum = &sum + &prod.shift(2 * n * j);
    }
    &colored_jones_unknot(n as u32) * &sum
}

/// `1 - e^x`, accurate when `x` is small.
fn one_minus_exp(x: &Complex) -> Complex {
    let prec = x.prec();
    let half = Complex::with_val(prec, x / 2u32);
    let e = Complex::with_val(prec, half.exp_ref());
    let s = Complex::with_val(prec, half.sinh_ref());
    Complex::with_val(prec, e * s * -2i32)
}

fn certify(value: Complex, abs_err: Float, digits: u32) -> Result<Certified<Complex>, CjonesError> {
    let c = Certified { value, abs_err };
    let rel = c.rel_err();
    if rel > tol(digits / 2) {
        return Err(CjonesError::Precision { digits, rel_err: crate::num::fmt_bound(&rel) });
    }
    Ok(c)
}

/// Kashaev invariant `Σ_{m<N} (q)_m (q^-1)_m` at `q = e^(2πi/N)`.
pub fn kashaev_41(n: u32, digits: u32) -> Result<Certified<Complex>, CjonesError> {
    if n == 0 {
        return Err(CjonesError::Input("N must be positive".into()));
    }
    let prec = bits_for_digits(2 * digits);
    let two_pi_i_over_n = Complex::with_val(prec, (0, Float::with_val(prec, Constant::Pi) * 2u32 / n));
    let mut term = Complex::with_val(prec, 1);
    let mut sum = Complex::with_val(prec, 1);
    let mut mag = Float::with_val(BOUND_PREC, 1);
    for m in 1..n {
        let x = Complex::with_val(prec, &two_pi_i_over_n * m);
        let a = one_minus_exp(&x);
        let b = one_minus_exp(&Complex::with_val(prec, -&x));
        term *= a;
        term *= b;
        sum += &term;
        // each factor is good to a few ulps; the running product accumulates them
        mag += Float::with_val(BOUND_PREC, term.abs_ref()) * (16 * m + 8);
    }
    let err = mag * unit_roundoff(prec);
    certify(sum, err, digits)
}

/// Numeric `J_N(4_1; q = e^(2ħ))` from the cyclotomic sum.
pub fn jn_numeric(point: &EvalPoint, digits: u32) -> Result<Certified<Complex>, CjonesError> {
    let n = point.n;
    if n == 0 {
        return Err(CjonesError::Input("N must be positive".into()));
    }
    let prec = bits_for_digits(2 * digits);
    if let Some(k) = point.k {
        if k.abs() == 1 {
            return Err(CjonesError::Input("q = 1 is not a valid evaluation point".into()));
        }
        // q^N = 1 with q != 1: the quantum integer [N] vanishes identically
        if k != 0 && (n as i64) % k == 0 {
            return Ok(Certified { value: Complex::new(prec), abs_err: Float::new(BOUND_PREC) });
        }
    }
    let hbar = Complex::with_val(prec, &point.hbar);
    if hbar.real().is_zero() && hbar.imag().is_zero() {
        return Err(CjonesError::Input("u must be nonzero".into()));
    }
    let two_h = Complex::with_val(prec, &hbar * 2u32);
    let q_n = Complex::with_val(prec, Complex::with_val(prec, &two_h * n).exp_ref());
    let mut term = Complex::with_val(prec, 1);
    let mut sum = Complex::with_val(prec, 1);
    let mut mag = Float::with_val(BOUND_PREC, 1);
    for j in 1..n as i64 {
        let a = one_minus_exp(&Complex::with_val(prec, &two_h * (j - n as i64)));
        let b = one_minus_exp(&Complex::with_val(prec, &two_h * (-j - n as i64)));
        term *= &q_n;
        term *= a;
        term *= b;
        sum += &term;
        mag += Float::with_val(BOUND_PREC, term.abs_ref()) * (24 * j + 8);
    }
    let sum_err = mag * unit_roundoff(prec);
    // [N] = sinh(Nħ)/sinh(ħ)
    let num = Complex::with_val(prec, Complex::with_val(prec, &hbar * n).sinh_ref());
    let den = Complex::with_val(prec, hbar.sinh_ref());
    let qint = Complex::with_val(prec, &num / &den);
    let qint_rel = unit_roundoff(prec) * 16u32;
    let qabs = Float::with_val(BOUND_PREC, qint.abs_ref());
    let sabs = Float::with_val(BOUND_PREC, sum.abs_ref());
    let value = Complex::with_val(prec, &qint * &sum);
    let abs_err = Float::with_val(BOUND_PREC, &qabs * &sum_err) + qint_rel * qabs * sabs;
    certify(value, abs_err, digits)
}

/// `V_N = J_N / [N]` at `q = e^(2πi/N)`, dividing symbolically before evaluating.
pub fn kashaev_from_colored(jn: &LaurentHalf, n: u32, digits: u32) -> Result<Certified<Complex>, CjonesError> {
    let qint = colored_jones_unknot(n);
    let quot = jn
        .div_exact(&qint)
        .ok_or_else(|| CjonesError::Input(format!("[{n}] does not divide J_{n}")))?;
    let prec = bits_for_digits(2 * digits);
    let s = Complex::with_val(prec, (0, Float::with_val(prec, Constant::Pi) / n));
    let s = Complex::with_val(prec, s.exp_ref());
    let (v, err) = quot.eval_with_bound(&s);
    certify(v, err, digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::c64;

    fn figure_eight() -> PlanarDiagram {
        PlanarDiagram::knot(vec![[4, 2, 5, 1], [8, 6, 1, 5], [6, 3, 7, 4], [2, 7, 3, 8]]).unwrap()
    }

    #[test]
    fn quantum_integers() {
        assert_eq!(colored_jones_unknot(1), LaurentHalf::one());
        assert_eq!(colored_jones_unknot(2), LaurentHalf::unknot());
        assert_eq!(colored_jones_unknot(3), LaurentHalf::from_pairs([(2, 1), (0, 1), (-2, 1)]));
    }

    #[test]
    fn habiro_small() {
        assert_eq!(habiro_41(1), LaurentHalf::one());
        assert_eq!(habiro_41(2), LaurentHalf::from_pairs([(5, 1), (-5, 1)]));
        for n in 1..=8 {
            let j = habiro_41(n);
            assert!(j.is_symmetric(), "N = {n}");
            assert_eq!(j.parity(), Some(((n + 1) % 2) as i64));
        }
    }

    #[test]
    fn habiro_three_hand_expansion() {
        // s^-14 (1 - s^4 + s^12 + s^14 + s^16 - s^24 + s^28)
        let want = LaurentHalf::from_pairs([(0, 1), (4, -1), (12, 1), (14, 1), (16, 1), (24, -1), (28, 1)]).shift(-14);
        assert_eq!(habiro_41(3), want);
    }

    #[test]
    fn cabling_matches_habiro() {
        let k = figure_eight();
        assert_eq!(colored_jones_by_cabling(&k, 1).unwrap(), LaurentHalf::one());
        assert_eq!(colored_jones_by_cabling(&k, 2).unwrap(), habiro_41(2));
        assert_eq!(colored_jones_by_cabling(&k, 3).unwrap(), habiro_41(3));
        assert!(matches!(colored_jones_by_cabling(&k, 4), Err(CjonesError::Color(4))));
    }

    /// Independent route: `Σ_m Π_{k≤m} 4 sin²(πk/N)` in real arithmetic.
    fn kashaev_sine_oracle(n: u32, prec: u32) -> Float {
        let pi = Float::with_val(prec, Constant::Pi);
        let mut sum = Float::with_val(prec, 0);
        let mut prod = Float::with_val(prec, 1);
        for m in 0..n {
            if m > 0 {
                let s = Float::with_val(prec, Float::with_val(prec, &pi * m) / n).sin();
                prod *= Float::with_val(prec, s.square_ref()) * 4u32;
            }
            sum += &prod;
        }
        sum
    }

    #[test]
    fn kashaev_small_values() {
        for (n, want) in [(1u32, 1), (2, 5), (3, 13)] {
            let v = kashaev_41(n, 64).unwrap();
            let d = Complex::with_val(256, &v.value - want);
            assert!(Float::with_val(64, d.abs_ref()) < 1e-60, "N = {n}");
        }
    }

    #[test]
    fn kashaev_matches_sine_oracle() {
        for n in [5u32, 17, 60] {
            let v = kashaev_41(n, 64).unwrap();
            let o = kashaev_sine_oracle(n, 400);
            let d = Float::with_val(400, v.value.real() - &o) / &o;
            assert!(d.abs() < 1e-60, "N = {n}");
            assert!(Float::with_val(64, v.value.imag().abs_ref()) < 1e-60);
        }
    }

    #[test]
    fn kashaev_is_quotient_of_colored() {
        for n in 1..=12 {
            let a = kashaev_41(n, 40).unwrap();
            let b = kashaev_from_colored(&habiro_41(n), n, 40).unwrap();
            assert!(crate::num::rel_diff(&a.value, &b.value) < 1e-35, "N = {n}");
        }
    }

    #[test]
    fn kashaev_growth_approaches_volume() {
        // the N^(3/2) prefactor makes (2π/N) log V_N approach the volume from above
        let prec = bits_for_digits(64);
        let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
        let vol = 2.029_883_212_819_307_f64;
        let mut last = f64::INFINITY;
        for n in [50u32, 100, 200, 400] {
            let v = kashaev_41(n, 64).unwrap();
            let rate = (Float::with_val(prec, v.value.real().ln_ref()) * &two_pi / n).to_f64();
            assert!(rate > vol && rate < last, "N = {n}: {rate}");
            last = rate;
        }
        assert!(last - vol < 0.15);
    }

    #[test]
    fn numeric_matches_symbolic() {
        let prec = bits_for_digits(128);
        for n in [1u32, 2, 7, 11] {
            let u = c64(prec, 0.7, 2.1);
            let p = EvalPoint::from_u(&u, n);
            let v = jn_numeric(&p, 50).unwrap();
            let s = Complex::with_val(prec, p.hbar.exp_ref());
            let want = habiro_41(n).eval(&s);
            assert!(crate::num::rel_diff(&v.value, &want) < 1e-40, "N = {n}");
        }
    }

    #[test]
    fn numeric_vanishes_at_roots_of_unity() {
        let p = EvalPoint::at_level(7, 7, 256);
        let v = jn_numeric(&p, 40).unwrap();
        assert!(v.value.real().is_zero() && v.value.imag().is_zero());
        let s = Complex::with_val(256, p.hbar.exp_ref());
        assert!(Float::with_val(64, habiro_41(7).eval(&s).abs_ref()) < 1e-60);
    }

    #[test]
    fn pochhammer_recursion() {
        let x = c64(128, 0.3, -0.4);
        let mut p = QPochhammer::new(&x, 0);
        assert_eq!(p.value, Complex::with_val(128, 1));
        for m in 1..6 {
            p = p.next();
            let direct = QPochhammer::new(&x, m);
            assert!(crate::num::rel_diff(&p.value, &direct.value) < 1e-35);
        }
    }
}
