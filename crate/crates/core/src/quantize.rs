//! Deformation quantization at desk scale: the Moyal product for constant
//! Poisson structures, admissible graphs and their bidifferential operators,
//! Bohr-Sommerfeld counting and the harmonic oscillator.
//!
//! Products follow the convention `f ⋆ g = fg + ħ α^ij ∂_i f ∂_j g + ...`,
//! with no factor `i/2`; the usual Moyal product is recovered with
//! `ħ -> iħ/2`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuantizeError {
    #[error("Poisson bivector is not constant")]
    NonConstant,
    #[error("Poisson bivector is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("variable count mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("graph order {0} exceeds the enumeration budget of 4")]
    Budget(u32),
    #[error("malformed graph: {0}")]
    Malformed(String),
    #[error("energy must be positive")]
    Energy,
}

/// Polynomial in `x_1..x_d` with rational coefficients; exponent vectors
/// are kept in lexicographic order and zero terms are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyObs {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
    /// State carries an implicit factor `exp(-x_1²/2ħ)`.
    pub gaussian: bool,
}

impl PolyObs {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new(), gaussian: false }
    }

    pub fn constant(nvars: usize, c: impl Into<Rational>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::from(1));
        p
    }

    /// From `(coefficient, exponents)` pairs.
    pub fn from_terms(nvars: usize, terms: &[(i64, &[u32])]) -> Self {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e.to_vec(), Rational::from(*c));
        }
        p
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_default();
        *entry += c;
        if *entry == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), Rational::from(v * c));
        }
        out.gaussian = self.gaussian;
        out
    }

    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.add_term(e2, Rational::from(c * e[i]));
            }
        }
        out
    }

    /// Embeds into `total` variables starting at `offset`.
    fn embed(&self, offset: usize, total: usize) -> Self {
        let mut out = Self::zero(total);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; total];
            e2[offset..offset + self.nvars].copy_from_slice(e);
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Restricts `x_(i + d) = x_i` for a polynomial in `2d` variables.
    fn diagonal(&self) -> Self {
        let d = self.nvars / 2;
        let mut out = Self::zero(d);
        for (e, c) in &self.terms {
            let e2: Vec<u32> = (0..d).map(|i| e[i] + e[i + d]).collect();
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Random polynomial of total degree at most `deg` with coefficients in `-5..=5`.
    pub fn random(nvars: usize, deg: u32, rng: &mut impl Rng) -> Self {
        let mut p = Self::zero(nvars);
        let mut monos = vec![vec![]];
        for _ in 0..nvars {
            monos = monos
                .into_iter()
                .flat_map(|m: Vec<u32>| {
                    let used: u32 = m.iter().sum();
                    (0..=deg - used).map(move |k| {
                        let mut m2 = m.clone();
                        m2.push(k);
                        m2
                    })
                })
                .collect();
        }
        for e in monos {
            if rng.gen_bool(0.6) {
                p.add_term(e, Rational::from(rng.gen_range(-5i64..=5)));
            }
        }
        p
    }
}

impl std::ops::Add for &PolyObs {
    type Output = PolyObs;
    fn add(self, rhs: &PolyObs) -> PolyObs {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &PolyObs {
    type Output = PolyObs;
    fn sub(self, rhs: &PolyObs) -> PolyObs {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), Rational::from(-c));
        }
        out
    }
}

impl std::ops::Mul for &PolyObs {
    type Output = PolyObs;
    fn mul(self, rhs: &PolyObs) -> PolyObs {
        let mut out = PolyObs::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, Rational::from(c1 * c2));
            }
        }
        out.gaussian = self.gaussian || rhs.gaussian;
        out
    }
}

impl fmt::Display for PolyObs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let vars: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{k}", i + 1) })
                    .collect();
                match (vars.is_empty(), c.to_string().as_str()) {
                    (true, cs) => cs.to_string(),
                    (false, "1") => vars.join("*"),
                    (false, "-1") => format!("-{}", vars.join("*")),
                    (false, cs) => format!("{cs}*{}", vars.join("*")),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
    }
}

/// `Σ_k ħ^k · coeffs[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HbarSeries {
    pub coeffs: Vec<PolyObs>,
}

impl HbarSeries {
    pub fn from_poly(p: PolyObs) -> Self {
        Self { coeffs: vec![p] }
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(PolyObs::is_zero) {
            self.coeffs.pop();
        }
        self
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let d = self.coeffs[0].nvars();
        let z = PolyObs::zero(d);
        let coeffs = (0..n)
            .map(|k| self.coeffs.get(k).unwrap_or(&z) - other.coeffs.get(k).unwrap_or(&z))
            .collect();
        Self { coeffs }.trimmed()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(PolyObs::is_zero)
    }
}

/// `d × d` antisymmetric matrix of polynomial entries `α^ij`.
#[derive(Clone, Debug)]
pub struct PoissonBivector {
    entries: Vec<Vec<PolyObs>>,
}

impl PoissonBivector {
    pub fn new(entries: Vec<Vec<PolyObs>>) -> Result<Self, QuantizeError> {
        let d = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != d {
                return Err(QuantizeError::Dimension(row.len(), d));
            }
            for j in 0..d {
                if !(&entries[i][j] + &entries[j][i]).is_zero() {
                    return Err(QuantizeError::NotAntisymmetric(i, j));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Darboux form on `x_1..x_n, p_1..p_n`: `α^(x_k p_k) = 1`.
    pub fn canonical(n: usize) -> Self {
        let d = 2 * n;
        let mut e = vec![vec![PolyObs::zero(d); d]; d];
        for k in 0..n {
            e[k][k + n] = PolyObs::constant(d, 1);
            e[k + n][k] = PolyObs::constant(d, -1);
        }
        Self { entries: e }
    }

    /// `α^12 = φ = -α^21` in two variables.
    pub fn planar(phi: PolyObs) -> Self {
        let z = PolyObs::zero(2);
        let neg = &z - &phi;
        Self { entries: vec![vec![z.clone(), phi], vec![neg, z]] }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &PolyObs {
        &self.entries[i][j]
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().flatten().all(PolyObs::is_constant)
    }

    fn constant_entry(&self, i: usize, j: usize) -> Rational {
        self.entries[i][j].terms().next().map(|(_, c)| c.clone()).unwrap_or_default()
    }
}

/// `f ⋆ g` up to `ħ^order` (all terms when `order` is `None`) for constant `α`:
/// the `ħ^n` coefficient is `(1/n!) T^n (f(x) g(y))` restricted to `y = x`,
/// where `T = α^ij ∂_(x_i) ∂_(y_j)`.
pub fn moyal(f: &PolyObs, g: &PolyObs, alpha: &PoissonBivector, order: Option<usize>) -> Result<HbarSeries, QuantizeError> {
    let d = alpha.dim();
    if f.nvars() != d || g.nvars() != d {
        return Err(QuantizeError::Dimension(f.nvars(), d));
    }
    if !alpha.is_constant() {
        return Err(QuantizeError::NonConstant);
    }
    let pairs: Vec<(usize, usize, Rational)> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, alpha.constant_entry(i, j)))
        .filter(|(_, _, c)| *c != 0)
        .collect();
    let mut h = &f.embed(0, 2 * d) * &g.embed(d, 2 * d);
    let mut coeffs = Vec::new();
    let mut fact = Integer::from(1);
    let mut n = 0usize;
    loop {
        coeffs.push(h.diagonal().scale(&Rational::from((1, fact.clone()))));
        n += 1;
        if order.is_some_and(|o| n > o) {
            break;
        }
        let mut next = PolyObs::zero(2 * d);
        for (i, j, c) in &pairs {
            next = &next + &h.deriv(*i).deriv(d + j).scale(c);
        }
        if next.is_zero() {
            break;
        }
        h = next;
        fact *= n as u32;
    }
    Ok(HbarSeries { coeffs }.trimmed())
}

/// `F ⋆ G` for ħ-series, by bilinearity.
pub fn moyal_series(f: &HbarSeries, g: &HbarSeries, alpha: &PoissonBivector) -> Result<HbarSeries, QuantizeError> {
    let d = alpha.dim();
    let mut out: Vec<PolyObs> = Vec::new();
    for (a, fa) in f.coeffs.iter().enumerate() {
        for (b, gb) in g.coeffs.iter().enumerate() {
            let s = moyal(fa, gb, alpha, None)?;
            for (k, c) in s.coeffs.into_iter().enumerate() {
                let idx = a + b + k;
                if out.len() <= idx {
                    out.resize(idx + 1, PolyObs::zero(d));
                }
                out[idx] = &out[idx] + &c;
            }
        }
    }
    if out.is_empty() {
        out.push(PolyObs::zero(d));
    }
    Ok(HbarSeries { coeffs: out }.trimmed())
}

/// `f ⋆ g - g ⋆ f`.
pub fn star_commutator(f: &PolyObs, g: &PolyObs, alpha: &PoissonBivector) -> Result<HbarSeries, QuantizeError> {
    Ok(moyal(f, g, alpha, None)?.sub(&moyal(g, f, alpha, None)?))
}

// ---------------------------------------------------------------------------
// Admissible graphs

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    /// Internal vertex, 1-based.
    V(u32),
    L,
    R,
}

/// Order-`n` graph: vertex `k` has edges to `i[k-1]` and `j[k-1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdmissibleGraph {
    pub i: Vec<Target>,
    pub j: Vec<Target>,
}

impl AdmissibleGraph {
    pub fn new(i: Vec<Target>, j: Vec<Target>) -> Result<Self, QuantizeError> {
        let g = Self { i, j };
        g.validate()?;
        Ok(g)
    }

    pub fn order(&self) -> u32 {
        self.i.len() as u32
    }

    fn validate(&self) -> Result<(), QuantizeError> {
        let n = self.i.len();
        if self.j.len() != n {
            return Err(QuantizeError::Malformed("maps of different length".into()));
        }
        for k in 0..n {
            let me = Target::V(k as u32 + 1);
            for t in [self.i[k], self.j[k]] {
                if t == me {
                    return Err(QuantizeError::Malformed(format!("vertex {} points to itself", k + 1)));
                }
                if let Target::V(v) = t {
                    if v == 0 || v as usize > n {
                        return Err(QuantizeError::Malformed(format!("no vertex {v}")));
                    }
                }
            }
            if self.i[k] == self.j[k] {
                return Err(QuantizeError::Malformed(format!("vertex {} has a double edge", k + 1)));
            }
        }
        Ok(())
    }

    pub fn has_internal_edge(&self) -> bool {
        self.i.iter().chain(&self.j).any(|t| matches!(t, Target::V(_)))
    }
}

/// All `n^n (n+1)^n` admissible graphs of order `n ≤ 4`, in lexicographic order.
pub fn enumerate_graphs(n: u32) -> Result<Vec<AdmissibleGraph>, QuantizeError> {
    if n > 4 {
        return Err(QuantizeError::Budget(n));
    }
    let targets: Vec<Target> = (1..=n).map(Target::V).chain([Target::L, Target::R]).collect();
    let choices: Vec<Vec<(Target, Target)>> = (1..=n)
        .map(|k| {
            let me = Target::V(k);
            let mut v = Vec::new();
            for &a in &targets {
                for &b in &targets {
                    if a != me && b != me && a != b {
                        v.push((a, b));
                    }
                }
            }
            v
        })
        .collect();
    let mut out = vec![AdmissibleGraph { i: vec![], j: vec![] }];
    for opts in &choices {
        out = out
            .into_iter()
            .flat_map(|g| {
                opts.iter().map(move |&(a, b)| {
                    let mut g2 = g.clone();
                    g2.i.push(a);
                    g2.j.push(b);
                    g2
                })
            })
            .collect();
    }
    Ok(out)
}

/// `B_Γ(f, g)`: sum over labelings `I` of the edges by `1..d` of
/// `Π_k (∂ from edges into k) α^(I(e_k1) I(e_k2)) · (∂ into L) f · (∂ into R) g`.
pub fn graph_operator(
    gamma: &AdmissibleGraph,
    alpha: &PoissonBivector,
    f: &PolyObs,
    g: &PolyObs,
) -> Result<PolyObs, QuantizeError> {
    gamma.validate()?;
    let d = alpha.dim();
    if f.nvars() != d || g.nvars() != d {
        return Err(QuantizeError::Dimension(f.nvars(), d));
    }
    let n = gamma.i.len();
    // edges in the order (1,i), (1,j), (2,i), ...
    let targets: Vec<Target> = (0..n).flat_map(|k| [gamma.i[k], gamma.j[k]]).collect();
    let edges = targets.len();
    let mut total = PolyObs::zero(d);
    let mut label = vec![0usize; edges];
    loop {
        let mut term = PolyObs::constant(d, 1);
        let mut dead = false;
        for k in 0..n {
            let mut factor = alpha.entry(label[2 * k], label[2 * k + 1]).clone();
            for (e, t) in targets.iter().enumerate() {
                if *t == Target::V(k as u32 + 1) {
                    factor = factor.deriv(label[e]);
                }
            }
            if factor.is_zero() {
                dead = true;
                break;
            }
            term = &term * &factor;
        }
        if !dead {
            let mut ff = f.clone();
            let mut gg = g.clone();
            for (e, t) in targets.iter().enumerate() {
                match t {
                    Target::L => ff = ff.deriv(label[e]),
                    Target::R => gg = gg.deriv(label[e]),
                    Target::V(_) => {}
                }
            }
            total = &total + &(&term * &(&ff * &gg));
        }
        // next labeling
        let mut pos = 0;
        loop {
            if pos == edges {
                return Ok(total);
            }
            label[pos] += 1;
            if label[pos] < d {
                break;
            }
            label[pos] = 0;
            pos += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Bohr-Sommerfeld and the oscillator

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BohrSommerfeld {
    pub quantizable: bool,
    pub n: Option<Integer>,
}

/// `∮θ = 2πE ∈ 2πħℤ`, i.e. `E/ħ ∈ ℤ`, without the Maslov shift.
pub fn bohr_sommerfeld(e: &Rational, hbar: &Rational) -> Result<BohrSommerfeld, QuantizeError> {
    if *e <= 0 || *hbar <= 0 {
        return Err(QuantizeError::Energy);
    }
    let q = Rational::from(e / hbar);
    if *q.denom() == 1 {
        Ok(BohrSommerfeld { quantizable: true, n: Some(q.numer().clone()) })
    } else {
        Ok(BohrSommerfeld { quantizable: false, n: None })
    }
}

/// `∮ p dx` over the level set `(x² + p²)/2 = E`, by the trapezoid rule in
/// the angle (spectrally accurate for this periodic integrand).
pub fn loop_action(e: f64, samples: usize) -> f64 {
    let r = (2.0 * e).sqrt();
    let h = 2.0 * std::f64::consts::PI / samples as f64;
    // x = r cos t, p = -r sin t traverses the loop clockwise in (x, p)
    (0..samples)
        .map(|k| {
            let t = k as f64 * h;
            let p = -r * t.sin();
            let dx = -r * t.sin();
            p * dx
        })
        .sum::<f64>()
        * h
}

/// Variables of oscillator states: `x` and `ħ`.
const OSC_VARS: usize = 2;

/// `ħ d/dx` on `P(x) exp(-x²/2ħ)`, acting on the polynomial part: `ħP' - xP`.
fn hbar_dx(p: &PolyObs) -> PolyObs {
    let x = PolyObs::var(OSC_VARS, 0);
    let h = PolyObs::var(OSC_VARS, 1);
    &(&h * &p.deriv(0)) - &(&x * p)
}

/// Polynomial part `P_n` of the n-th state, `P_0 = 1`, `P_(n+1) = 2xP_n - ħP_n'`.
pub fn oscillator_state(n: u32) -> PolyObs {
    let x = PolyObs::var(OSC_VARS, 0);
    let mut p = PolyObs::constant(OSC_VARS, 1);
    for _ in 0..n {
        // (x - ħ d/dx) applied to P e^(-x²/2ħ)
        p = &(&x * &p) - &hbar_dx(&p);
    }
    p.gaussian = true;
    p
}

/// `(O_H - ħ·level) ψ_n` with `O_H = (x̂² + p̂²)/2`, `p̂ = -iħ d/dx`, as the
/// polynomial part in `(x, ħ)` of a Gaussian-weighted state.
pub fn oscillator_residual(n: u32, level: &Rational) -> PolyObs {
    let p = oscillator_state(n);
    let x = PolyObs::var(OSC_VARS, 0);
    let h = PolyObs::var(OSC_VARS, 1);
    let half = Rational::from((1, 2));
    let x2 = &(&x * &x) * &p;
    let p2 = hbar_dx(&hbar_dx(&p));
    let oh = (&x2 - &p2).scale(&half);
    let mut r = &oh - &(&h * &p).scale(level);
    r.gaussian = true;
    r
}

/// Residual at the Maslov-corrected energy `E = ħ(n + 1/2)`.
pub fn oscillator_check(n: u32) -> Result<PolyObs, QuantizeError> {
    if n > 6 {
        return Err(QuantizeError::Budget(n));
    }
    Ok(oscillator_residual(n, &(Rational::from(n) + Rational::from((1, 2)))))
}

/// Seeded random polynomial triples for associativity checks.
pub fn random_triples(count: usize, nvars: usize, deg: u32, seed: u64) -> Vec<[PolyObs; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            [
                PolyObs::random(nvars, deg, &mut rng),
                PolyObs::random(nvars, deg, &mut rng),
                PolyObs::random(nvars, deg, &mut rng),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xp() -> (PolyObs, PolyObs, PoissonBivector) {
        (PolyObs::var(2, 0), PolyObs::var(2, 1), PoissonBivector::canonical(1))
    }

    #[test]
    fn moyal_on_coordinates() {
        let (x, p, a) = xp();
        let s = moyal(&x, &p, &a, None).unwrap();
        assert_eq!(s.coeffs, vec![&x * &p, PolyObs::constant(2, 1)]);
        let c = star_commutator(&x, &p, &a).unwrap();
        assert_eq!(c.coeffs, vec![PolyObs::zero(2), PolyObs::constant(2, 2)]);
    }

    #[test]
    fn moyal_truncation() {
        let (x, p, a) = xp();
        let x2 = &x * &x;
        let p2 = &p * &p;
        let full = moyal(&x2, &p2, &a, None).unwrap();
        assert_eq!(full.coeffs.len(), 3);
        // x² ⋆ p² = x²p² + 4ħxp + 2ħ²
        assert_eq!(full.coeffs[2], PolyObs::constant(2, 2));
        assert_eq!(full.coeffs[1], (&x * &p).scale(&Rational::from(4)));
        assert_eq!(moyal(&x2, &p2, &a, Some(1)).unwrap().coeffs.len(), 2);
    }

    #[test]
    fn moyal_rejects_non_constant() {
        let (x, p, _) = xp();
        let a = PoissonBivector::planar(x.clone());
        assert_eq!(moyal(&x, &p, &a, None), Err(QuantizeError::NonConstant));
        let bad = vec![vec![PolyObs::zero(2), PolyObs::constant(2, 1)], vec![PolyObs::constant(2, 1), PolyObs::zero(2)]];
        assert!(matches!(PoissonBivector::new(bad), Err(QuantizeError::NotAntisymmetric(..))));
    }

    /// Brute-force oracle for `(f ⋆ g)_1 = α^ij ∂_i f ∂_j g`.
    fn poisson(f: &PolyObs, g: &PolyObs, a: &PoissonBivector) -> PolyObs {
        let d = a.dim();
        let mut out = PolyObs::zero(d);
        for i in 0..d {
            for j in 0..d {
                out = &out + &(&(&f.deriv(i) * &g.deriv(j)) * a.entry(i, j));
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn first_order_term_is_poisson_bracket(seed in any::<u64>()) {
            let a = PoissonBivector::canonical(2);
            let t = random_triples(1, 4, 3, seed);
            let [f, g, _] = &t[0];
            let s = moyal(f, g, &a, None).unwrap();
            prop_assert_eq!(&s.coeffs[0], &(f * g));
            let first = s.coeffs.get(1).cloned().unwrap_or_else(|| PolyObs::zero(4));
            prop_assert_eq!(first, poisson(f, g, &a));
        }

        #[test]
        fn moyal_is_associative(seed in any::<u64>()) {
            let a = PoissonBivector::canonical(1);
            let t = random_triples(1, 2, 4, seed);
            let [f, g, h] = &t[0];
            let fg = moyal(f, g, &a, None).unwrap();
            let gh = moyal(g, h, &a, None).unwrap();
            let left = moyal_series(&fg, &HbarSeries::from_poly(h.clone()), &a).unwrap();
            let right = moyal_series(&HbarSeries::from_poly(f.clone()), &gh, &a).unwrap();
            prop_assert!(left.sub(&right).is_zero());
        }
    }

    #[test]
    fn graph_counts() {
        for (n, want) in [(1u32, 2usize), (2, 36), (3, 1728)] {
            let gs = enumerate_graphs(n).unwrap();
            assert_eq!(gs.len(), want);
            assert_eq!(want, (n.pow(n) * (n + 1).pow(n)) as usize);
            let set: std::collections::HashSet<_> = gs.iter().collect();
            assert_eq!(set.len(), want);
        }
        assert_eq!(enumerate_graphs(5), Err(QuantizeError::Budget(5)));
    }

    #[test]
    fn second_order_graph_is_the_moyal_term() {
        use Target::*;
        let gamma = AdmissibleGraph::new(vec![L, L], vec![R, R]).unwrap();
        let a = PoissonBivector::canonical(1);
        for t in random_triples(5, 2, 4, 7) {
            let [f, g, _] = &t;
            let b = graph_operator(&gamma, &a, f, g).unwrap();
            let m = moyal(f, g, &a, None).unwrap();
            let two = m.coeffs.get(2).cloned().unwrap_or_else(|| PolyObs::zero(2)).scale(&Rational::from(2));
            assert_eq!(b, two);
        }
    }

    #[test]
    fn internal_edges_vanish_for_constant_alpha() {
        let a = PoissonBivector::canonical(1);
        let f = PolyObs::from_terms(2, &[(1, &[3, 1]), (2, &[1, 2])]);
        let g = PolyObs::from_terms(2, &[(1, &[2, 2]), (-1, &[0, 3])]);
        for n in 1..=3 {
            for gamma in enumerate_graphs(n).unwrap() {
                if gamma.has_internal_edge() {
                    assert!(graph_operator(&gamma, &a, &f, &g).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn fourth_order_example_graph() {
        use Target::*;
        let gamma = AdmissibleGraph::new(vec![L, V(3), V(1), V(3)], vec![V(2), R, L, V(2)]).unwrap();
        let f = PolyObs::from_terms(2, &[(1, &[2, 0])]);
        let g = PolyObs::var(2, 1);
        // vertices 2 and 3 each take two derivatives, so linear α gives zero
        let linear = PoissonBivector::planar(PolyObs::var(2, 0));
        assert!(graph_operator(&gamma, &linear, &f, &g).unwrap().is_zero());
        // φ = x1² + x1x2 + x2²: by hand, B = 2 ∂2φ · φ · (φ12² - φ11 φ22) = -6 (x1 + 2x2) φ
        let phi = PolyObs::from_terms(2, &[(1, &[2, 0]), (1, &[1, 1]), (1, &[0, 2])]);
        let quad = PoissonBivector::planar(phi.clone());
        let want = (&PolyObs::from_terms(2, &[(1, &[1, 0]), (2, &[0, 1])]) * &phi).scale(&Rational::from(-6));
        assert_eq!(graph_operator(&gamma, &quad, &f, &g).unwrap(), want);
        assert!(AdmissibleGraph::new(vec![V(1)], vec![L]).is_err());
        assert!(AdmissibleGraph::new(vec![L], vec![L]).is_err());
    }

    #[test]
    fn bohr_sommerfeld_counts() {
        let r = |a: i64, b: i64| Rational::from((a, b));
        assert_eq!(bohr_sommerfeld(&r(3, 1), &r(1, 1)).unwrap(), BohrSommerfeld { quantizable: true, n: Some(Integer::from(3)) });
        assert!(!bohr_sommerfeld(&r(1, 4), &r(1, 2)).unwrap().quantizable);
        assert!(bohr_sommerfeld(&r(-1, 1), &r(1, 1)).is_err());
        for e in [0.5, 1.0, 3.25] {
            // ellipse area πab with a = b = √(2E)
            let want = std::f64::consts::PI * 2.0 * e;
            assert!((loop_action(e, 64) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn oscillator_levels() {
        for n in 0..=6 {
            assert!(oscillator_check(n).unwrap().is_zero(), "n = {n}");
            for wrong in [Rational::from(n), Rational::from(n + 1), Rational::from((2 * n as i64 + 3, 2))] {
                assert!(!oscillator_residual(n, &wrong).is_zero());
            }
        }
        assert_eq!(oscillator_state(1), {
            let mut p = PolyObs::var(2, 0).scale(&Rational::from(2));
            p.gaussian = true;
            p
        });
        assert!(oscillator_check(7).is_err());
    }

    #[test]
    fn display() {
        let p = PolyObs::from_terms(2, &[(1, &[1, 1]), (-1, &[0, 2]), (3, &[0, 0]), (-2, &[2, 0])]);
        assert_eq!(p.to_string(), "-2*x1^2 + x1*x2 - x2^2 + 3");
        assert_eq!(PolyObs::zero(2).to_string(), "0");
    }
}
