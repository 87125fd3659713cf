//! Planar diagrams, the Kauffman bracket and the Jones polynomial.
//!
//! Crossings use the usual PD convention: `[i, j, k, l]` lists the four arcs
//! counterclockwise starting from the incoming under-arc, so the under-strand
//! runs `i -> k`. The crossing is positive when the over-strand runs `l -> j`.

use std::collections::{BTreeMap, HashMap};

use rug::Integer;
use thiserror::Error;

use crate::laurent::LaurentHalf;

/// Largest diagram the state sum will accept.
pub const MAX_CROSSINGS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnotError {
    #[error("arc {0} appears {1} times; every arc must appear exactly twice")]
    MalformedArc(u32, usize),
    #[error("inconsistent orientation at crossing {0}")]
    Orientation(usize),
    #[error("orientation of the strand through crossing {0} cannot be determined")]
    AmbiguousOrientation(usize),
    #[error("diagram has {0} components but was not flagged as a link")]
    NotAKnot(usize),
    #[error("{0} crossings exceed the crossing budget")]
    CrossingBudget(usize),
    #[error("crossing index {0} out of range")]
    NoSuchCrossing(usize),
    #[error("bracket exponents have mixed parity")]
    Parity,
    #[error("cable of {0} strands is not supported")]
    CableStrands(u32),
    #[error("{0}")]
    Input(String),
}

/// Oriented planar diagram of a knot or link.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanarDiagram {
    crossings: Vec<[u32; 4]>,
    /// Crossing-free unknotted components.
    free_loops: u32,
    link: bool,
    /// `true` when the over-strand of the crossing runs `l -> j`.
    over_l_to_j: Vec<bool>,
    components: usize,
}

impl PlanarDiagram {
    /// A knot diagram; rejects diagrams with more than one component.
    pub fn knot(crossings: Vec<[u32; 4]>) -> Result<Self, KnotError> {
        let d = Self::build(crossings, 0, false)?;
        if d.components != 1 {
            return Err(KnotError::NotAKnot(d.components));
        }
        Ok(d)
    }

    pub fn link(crossings: Vec<[u32; 4]>, free_loops: u32) -> Result<Self, KnotError> {
        Self::build(crossings, free_loops, true)
    }

    pub fn unknot() -> Self {
        Self::build(Vec::new(), 1, false).expect("unknot")
    }

    pub fn unlink(n: u32) -> Self {
        Self::build(Vec::new(), n, true).expect("unlink")
    }

    fn build(crossings: Vec<[u32; 4]>, free_loops: u32, link: bool) -> Result<Self, KnotError> {
        let mut count: BTreeMap<u32, usize> = BTreeMap::new();
        for x in &crossings {
            for a in x {
                *count.entry(*a).or_default() += 1;
            }
        }
        if let Some((a, n)) = count.iter().find(|(_, n)| **n != 2) {
            return Err(KnotError::MalformedArc(*a, *n));
        }
        let (over_l_to_j, traced) = orient(&crossings)?;
        let components = traced + free_loops as usize;
        if components == 0 {
            return Err(KnotError::Input("empty diagram".into()));
        }
        Ok(Self {
            crossings,
            free_loops,
            link: link || components > 1,
            over_l_to_j,
            components,
        })
    }

    pub fn crossings(&self) -> &[[u32; 4]] {
        &self.crossings
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn free_loops(&self) -> u32 {
        self.free_loops
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_link(&self) -> bool {
        self.link
    }

    pub fn signs(&self) -> Vec<i32> {
        self.over_l_to_j.iter().map(|&p| if p { 1 } else { -1 }).collect()
    }

    pub fn writhe(&self) -> i64 {
        self.signs().iter().map(|&s| s as i64).sum()
    }

    fn max_label(&self) -> u32 {
        self.crossings.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Whether position `p` of crossing `c` is where the strand enters.
    fn is_entry(&self, c: usize, p: usize) -> bool {
        match p {
            0 => true,
            2 => false,
            1 => !self.over_l_to_j[c],
            _ => self.over_l_to_j[c],
        }
    }

    /// The same diagram seen in a mirror: every crossing changes type.
    pub fn mirror(&self) -> Self {
        let crossings = self
            .crossings
            .iter()
            .zip(&self.over_l_to_j)
            .map(|(x, &lj)| {
                let [i, j, k, l] = *x;
                if lj {
                    [l, i, j, k]
                } else {
                    [j, k, l, i]
                }
            })
            .collect();
        Self::build(crossings, self.free_loops, self.link).expect("mirror of a valid diagram")
    }

    /// Changes crossing `idx` from over to under.
    pub fn switch_crossing(&self, idx: usize) -> Result<Self, KnotError> {
        if idx >= self.crossings.len() {
            return Err(KnotError::NoSuchCrossing(idx));
        }
        let mut crossings = self.crossings.clone();
        let [i, j, k, l] = crossings[idx];
        crossings[idx] = if self.over_l_to_j[idx] { [l, i, j, k] } else { [j, k, l, i] };
        Self::build(crossings, self.free_loops, true)
    }

    /// Orientation-respecting smoothing of crossing `idx`.
    pub fn smooth_crossing(&self, idx: usize) -> Result<Self, KnotError> {
        if idx >= self.crossings.len() {
            return Err(KnotError::NoSuchCrossing(idx));
        }
        let [i, j, k, l] = self.crossings[idx];
        let pairs = if self.over_l_to_j[idx] { [(i, j), (l, k)] } else { [(i, l), (j, k)] };
        let mut rename: HashMap<u32, u32> = HashMap::new();
        let find = |x: u32, rename: &HashMap<u32, u32>| {
            let mut x = x;
            while let Some(&y) = rename.get(&x) {
                x = y;
            }
            x
        };
        for (x, y) in pairs {
            let (rx, ry) = (find(x, &rename), find(y, &rename));
            if rx != ry {
                rename.insert(rx, ry);
            }
        }
        let crossings: Vec<[u32; 4]> = self
            .crossings
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != idx)
            .map(|(_, x)| x.map(|a| find(a, &rename)))
            .collect();
        // a merged arc that touches no remaining crossing is a closed loop
        let mut roots: Vec<u32> = [i, j, k, l].iter().map(|&a| find(a, &rename)).collect();
        roots.sort_unstable();
        roots.dedup();
        let loops = roots
            .iter()
            .filter(|r| !crossings.iter().flatten().any(|a| a == *r))
            .count() as u32;
        Self::build(crossings, self.free_loops + loops, true)
    }

    /// Adds a curl of the given sign on arc `arc` (Reidemeister I).
    pub fn add_kink(&self, arc: u32, positive: bool) -> Result<Self, KnotError> {
        let mut entry = None;
        for (c, x) in self.crossings.iter().enumerate() {
            for p in 0..4 {
                if x[p] == arc && self.is_entry(c, p) {
                    entry = Some((c, p));
                }
            }
        }
        let (c, p) = entry.ok_or_else(|| KnotError::Input(format!("no arc {arc}")))?;
        let m = self.max_label() + 1;
        let out = m + 1;
        let mut crossings = self.crossings.clone();
        crossings[c][p] = out;
        crossings.push(if positive { [arc, out, m, m] } else { [arc, m, m, out] });
        Self::build(crossings, self.free_loops, self.link)
    }

    /// Closure of a braid on `strands` strands. Generator `k > 0` is `σ_k`,
    /// `k < 0` its inverse; `σ_k` is a positive crossing of strands `k, k+1`.
    pub fn from_braid(strands: u32, word: &[i32]) -> Result<Self, KnotError> {
        if strands == 0 {
            return Err(KnotError::Input("braid needs at least one strand".into()));
        }
        let n = strands as usize;
        let mut cur: Vec<u32> = (1..=strands).collect();
        let mut next = strands + 1;
        let mut crossings = Vec::with_capacity(word.len());
        for &g in word {
            let i = g.unsigned_abs() as usize;
            if g == 0 || i >= n {
                return Err(KnotError::Input(format!("generator {g} out of range")));
            }
            let (l, r) = (i - 1, i);
            let (nl, nr) = (next, next + 1);
            next += 2;
            crossings.push(half_twist(g > 0, cur[l], cur[r], nl, nr));
            cur[l] = nl;
            cur[r] = nr;
        }
        let mut free = 0;
        let mut rename = HashMap::new();
        for p in 0..n {
            if cur[p] == p as u32 + 1 {
                free += 1;
            } else {
                rename.insert(cur[p], p as u32 + 1);
            }
        }
        for x in crossings.iter_mut() {
            for a in x.iter_mut() {
                if let Some(&b) = rename.get(a) {
                    *a = b;
                }
            }
        }
        Self::build(crossings, free, true)
    }

    /// Zero-framed `n`-parallel cable: blackboard parallels plus compensating
    /// full twists on one arc so that all pairwise linking numbers vanish.
    pub fn cable(&self, n: u32) -> Result<Self, KnotError> {
        self.cable_with_budget(n, MAX_CROSSINGS)
    }

    /// [`cable`](Self::cable) with an explicit crossing budget.
    pub fn cable_with_budget(&self, n: u32, budget: usize) -> Result<Self, KnotError> {
        if n == 0 {
            return Err(KnotError::CableStrands(n));
        }
        if self.components != 1 {
            return Err(KnotError::Input("cabling requires a knot".into()));
        }
        if self.crossings.is_empty() {
            return Ok(Self::unlink(n));
        }
        let w = self.writhe();
        let nu = n as usize;
        let twist_crossings = (w.unsigned_abs() as usize) * nu * (nu - 1);
        let total = self.crossings.len() * nu * nu + twist_crossings;
        if total > budget {
            return Err(KnotError::CrossingBudget(total));
        }
        let mut next = 1u32;
        let mut fresh = || {
            let v = next;
            next += 1;
            v
        };
        let mut copy: BTreeMap<(u32, usize), u32> = BTreeMap::new();
        for x in &self.crossings {
            for a in x {
                for r in 0..nu {
                    copy.entry((*a, r)).or_insert_with(&mut fresh);
                }
            }
        }
        // twists live at the entry end of the first arc
        let twist_arc = self.crossings[0][0];
        let mut final_labels: Vec<u32> = (0..nu).map(|r| copy[&(twist_arc, r)]).collect();
        let mut out = Vec::with_capacity(total);
        if w != 0 {
            let positive = w < 0;
            for _ in 0..w.unsigned_abs() {
                for _ in 0..nu {
                    for i in 0..nu - 1 {
                        let (nl, nr) = (fresh(), fresh());
                        out.push(half_twist(positive, final_labels[i], final_labels[i + 1], nl, nr));
                        final_labels[i] = nl;
                        final_labels[i + 1] = nr;
                        // after n-1 generators the bundle has rotated one step
                    }
                }
            }
        }
        let lab = |a: u32, r: usize, entry: bool| -> u32 {
            if entry && a == twist_arc {
                final_labels[r]
            } else {
                copy[&(a, r)]
            }
        };
        for (c, x) in self.crossings.iter().enumerate() {
            let [i, j, k, l] = *x;
            let east = self.over_l_to_j[c];
            // vertical[col][g]: segment of column col entering geometric row g
            let mut vert = vec![vec![0u32; nu + 1]; nu];
            let mut horiz = vec![vec![0u32; nu + 1]; nu];
            for col in 0..nu {
                vert[col][0] = lab(i, col, true);
                vert[col][nu] = lab(k, col, false);
                for g in 1..nu {
                    vert[col][g] = fresh();
                }
            }
            for g in 0..nu {
                let r = if east { nu - 1 - g } else { g };
                horiz[g][0] = lab(l, r, east);
                horiz[g][nu] = lab(j, r, !east);
                for col in 1..nu {
                    horiz[g][col] = fresh();
                }
            }
            for g in 0..nu {
                for col in 0..nu {
                    out.push([vert[col][g], horiz[g][col + 1], vert[col][g + 1], horiz[g][col]]);
                }
            }
        }
        Self::build(out, 0, true)
    }
}

/// One crossing between adjacent parallel strands running upward.
fn half_twist(positive: bool, left: u32, right: u32, new_left: u32, new_right: u32) -> [u32; 4] {
    if positive {
        [right, new_right, new_left, left]
    } else {
        [left, right, new_right, new_left]
    }
}

/// Walks every strand that passes under some crossing, fixing the direction
/// of each over-strand. Returns the directions and the number of strands.
fn orient(crossings: &[[u32; 4]]) -> Result<(Vec<bool>, usize), KnotError> {
    let mut occ: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
    for (c, x) in crossings.iter().enumerate() {
        for (p, a) in x.iter().enumerate() {
            occ.entry(*a).or_default().push((c, p));
        }
    }
    let n = crossings.len();
    let mut dir: Vec<Option<bool>> = vec![None; n];
    let mut entered = vec![[false; 4]; n];
    let mut strands = 0;
    for start in 0..n {
        if entered[start][0] {
            continue;
        }
        strands += 1;
        let (mut c, mut p) = (start, 0usize);
        loop {
            if entered[c][p] {
                if (c, p) == (start, 0) {
                    break;
                }
                return Err(KnotError::Orientation(c));
            }
            entered[c][p] = true;
            match p {
                2 => return Err(KnotError::Orientation(c)),
                1 | 3 => {
                    let lj = p == 3;
                    if dir[c].is_some_and(|d| d != lj) {
                        return Err(KnotError::Orientation(c));
                    }
                    dir[c] = Some(lj);
                }
                _ => {}
            }
            let q = (p + 2) % 4;
            let arc = crossings[c][q];
            let &(c2, p2) = occ[&arc]
                .iter()
                .find(|&&e| e != (c, q))
                .ok_or(KnotError::MalformedArc(arc, 1))?;
            c = c2;
            p = p2;
        }
    }
    let mut out = Vec::with_capacity(n);
    for (c, d) in dir.iter().enumerate() {
        out.push(d.ok_or(KnotError::AmbiguousOrientation(c))?);
    }
    Ok((out, strands))
}

/// Polynomial in `A` with machine coefficients, dense around a fixed offset.
#[derive(Clone, Debug)]
struct APoly {
    c: Vec<i128>,
}

impl APoly {
    fn add_shifted(&mut self, other: &APoly, shift: isize) {
        for (k, v) in other.c.iter().enumerate() {
            if *v != 0 {
                let t = (k as isize + shift) as usize;
                self.c[t] += v;
            }
        }
    }

    /// Multiply by `d = -A^2 - A^-2`.
    fn times_loop(&self) -> APoly {
        let mut out = APoly { c: vec![0; self.c.len()] };
        for (k, v) in self.c.iter().enumerate() {
            if *v != 0 {
                out.c[k + 2] -= v;
                out.c[k - 2] -= v;
            }
        }
        out
    }
}

/// Open path endpoints: each open arc label maps to the label at the other end.
type Frontier = Vec<(u32, u32)>;

fn join(partner: &mut BTreeMap<u32, u32>, x: u32, y: u32) -> bool {
    if x == y {
        return true;
    }
    let fx = match partner.remove(&x) {
        Some(f) => f,
        None => x,
    };
    if fx == y {
        // x's path ends at y: closing it
        partner.remove(&y);
        return true;
    }
    let fy = match partner.remove(&y) {
        Some(f) => f,
        None => y,
    };
    if fx == x && fy == y {
        partner.insert(x, y);
        partner.insert(y, x);
    } else {
        partner.insert(fx, fy);
        partner.insert(fy, fx);
    }
    false
}

fn key_of(partner: &BTreeMap<u32, u32>) -> Frontier {
    partner.iter().filter(|(a, b)| a < b).map(|(a, b)| (*a, *b)).collect()
}

fn partner_of(key: &Frontier) -> BTreeMap<u32, u32> {
    let mut m = BTreeMap::new();
    for (a, b) in key {
        m.insert(*a, *b);
        m.insert(*b, *a);
    }
    m
}

/// Greedy order that keeps the frontier of half-processed arcs small.
fn contraction_order(crossings: &[[u32; 4]]) -> Vec<usize> {
    let n = crossings.len();
    let mut done = vec![false; n];
    let mut seen: HashMap<u32, usize> = HashMap::new();
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = None;
        let mut best_score = i64::MIN;
        for c in 0..n {
            if done[c] {
                continue;
            }
            let shared = crossings[c].iter().filter(|a| seen.get(a).copied().unwrap_or(0) == 1).count() as i64;
            if shared > best_score {
                best_score = shared;
                best = Some(c);
            }
        }
        let c = best.expect("crossing left");
        done[c] = true;
        for a in crossings[c] {
            *seen.entry(a).or_default() += 1;
        }
        order.push(c);
    }
    order
}

/// Unnormalized Kauffman bracket in the variable `A`, every closed loop
/// (including the last) weighted by `d = -A^2 - A^-2`. Returned as a
/// Laurent polynomial whose exponents are powers of `A`.
pub fn kauffman_bracket(d: &PlanarDiagram) -> Result<LaurentHalf, KnotError> {
    kauffman_bracket_with_budget(d, MAX_CROSSINGS)
}

/// [`kauffman_bracket`] with an explicit crossing budget.
pub fn kauffman_bracket_with_budget(d: &PlanarDiagram, budget: usize) -> Result<LaurentHalf, KnotError> {
    let n = d.crossing_count();
    if n > budget {
        return Err(KnotError::CrossingBudget(n));
    }
    let off = (3 * n + 2 * d.free_loops as usize + 8) as isize;
    let width = 2 * off as usize + 1;
    let mut states: BTreeMap<Frontier, APoly> = BTreeMap::new();
    let mut unit = APoly { c: vec![0; width] };
    unit.c[off as usize] = 1;
    states.insert(Vec::new(), unit);
    for c in contraction_order(d.crossings()) {
        let [i, j, k, l] = d.crossings()[c];
        let mut next: BTreeMap<Frontier, APoly> = BTreeMap::new();
        for (key, poly) in &states {
            // A-smoothing joins (i,j),(k,l); the B-smoothing joins (i,l),(j,k)
            for (pairs, shift) in [([(i, j), (k, l)], 1isize), ([(i, l), (j, k)], -1)] {
                let mut partner = partner_of(key);
                let mut loops = 0;
                for (x, y) in pairs {
                    if join(&mut partner, x, y) {
                        loops += 1;
                    }
                }
                let mut p = poly.clone();
                for _ in 0..loops {
                    p = p.times_loop();
                }
                let slot = next
                    .entry(key_of(&partner))
                    .or_insert_with(|| APoly { c: vec![0; width] });
                slot.add_shifted(&p, shift);
            }
        }
        states = next;
    }
    let mut total = states.remove(&Vec::new()).expect("all arcs closed");
    debug_assert!(states.is_empty());
    for _ in 0..d.free_loops {
        total = total.times_loop();
    }
    Ok(LaurentHalf::from_pairs(
        total
            .c
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(k, v)| (k as i64 - off as i64, Integer::from(*v))),
    ))
}

/// Jones polynomial in `s = q^(1/2)`, normalized so that the unknot gives
/// `s + s^-1` and disjoint union is multiplicative.
pub fn jones(d: &PlanarDiagram) -> Result<LaurentHalf, KnotError> {
    jones_with_budget(d, MAX_CROSSINGS)
}

/// [`jones`] with an explicit crossing budget.
pub fn jones_with_budget(d: &PlanarDiagram, budget: usize) -> Result<LaurentHalf, KnotError> {
    let bracket = kauffman_bracket_with_budget(d, budget)?;
    let w = d.writhe();
    // (-1)^c (-A^3)^(-w) <D>
    let sign: i64 = if (d.components() as i64 + w).rem_euclid(2) == 0 { 1 } else { -1 };
    let norm = bracket.shift(-3 * w).scale(&Integer::from(sign));
    if norm.terms().any(|(e, _)| e.rem_euclid(2) != 0) {
        return Err(KnotError::Parity);
    }
    // s = A^2
    Ok(LaurentHalf::from_pairs(norm.terms().map(|(e, c)| (e / 2, c.clone()))))
}

/// Zero-framed `n`-cable of a knot diagram.
pub fn cable(d: &PlanarDiagram, n: u32) -> Result<PlanarDiagram, KnotError> {
    d.cable(n)
}

pub fn writhe(d: &PlanarDiagram) -> i64 {
    d.writhe()
}

pub fn mirror(d: &PlanarDiagram) -> PlanarDiagram {
    d.mirror()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trefoil() -> PlanarDiagram {
        PlanarDiagram::knot(vec![[4, 2, 5, 1], [6, 4, 1, 3], [2, 6, 3, 5]]).unwrap()
    }

    fn figure_eight() -> PlanarDiagram {
        PlanarDiagram::knot(vec![[4, 2, 5, 1], [8, 6, 1, 5], [6, 3, 7, 4], [2, 7, 3, 8]]).unwrap()
    }

    #[test]
    fn writhes() {
        assert_eq!(trefoil().writhe(), 3);
        assert_eq!(trefoil().mirror().writhe(), -3);
        assert_eq!(figure_eight().writhe(), 0);
    }

    #[test]
    fn unknot_and_unlink() {
        assert_eq!(jones(&PlanarDiagram::unknot()).unwrap(), LaurentHalf::unknot());
        let two = jones(&PlanarDiagram::unlink(2)).unwrap();
        assert_eq!(two, LaurentHalf::unknot().pow(2));
    }

    #[test]
    fn trefoil_value() {
        let j = jones(&trefoil()).unwrap();
        assert_eq!(j, LaurentHalf::from_pairs([(-1, 1), (-3, 1), (-5, 1), (-9, -1)]));
    }

    #[test]
    fn figure_eight_value() {
        let j = jones(&figure_eight()).unwrap();
        assert_eq!(j, LaurentHalf::from_pairs([(5, 1), (-5, 1)]));
    }

    #[test]
    fn kinks_do_not_change_jones() {
        let t = trefoil();
        let j = jones(&t).unwrap();
        for arc in 1..=6 {
            for pos in [true, false] {
                let k = t.add_kink(arc, pos).unwrap();
                assert_eq!(k.writhe(), 3 + if pos { 1 } else { -1 });
                assert_eq!(jones(&k).unwrap(), j, "arc {arc} positive {pos}");
            }
        }
    }

    #[test]
    fn braid_closures() {
        let t = PlanarDiagram::from_braid(2, &[1, 1, 1]).unwrap();
        assert_eq!(t.components(), 1);
        assert_eq!(jones(&t).unwrap(), jones(&trefoil()).unwrap());
        let f = PlanarDiagram::from_braid(3, &[1, -2, 1, -2]).unwrap();
        assert_eq!(jones(&f).unwrap(), jones(&figure_eight()).unwrap());
        let u = PlanarDiagram::from_braid(3, &[1, 2]).unwrap();
        assert_eq!(jones(&u).unwrap(), LaurentHalf::unknot());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            PlanarDiagram::knot(vec![[1, 2, 3, 4]]),
            Err(KnotError::MalformedArc(..))
        ));
        let hopf = PlanarDiagram::from_braid(2, &[1, 1]).unwrap();
        assert_eq!(hopf.components(), 2);
        assert!(matches!(
            PlanarDiagram::knot(hopf.crossings().to_vec()),
            Err(KnotError::NotAKnot(2))
        ));
    }

    #[test]
    fn skein_relation_on_trefoil() {
        let t = trefoil();
        for c in 0..3 {
            let minus = t.switch_crossing(c).unwrap();
            let zero = t.smooth_crossing(c).unwrap();
            let (jp, jm, j0) = (jones(&t).unwrap(), jones(&minus).unwrap(), jones(&zero).unwrap());
            let lhs = &jp.shift(2) - &jm.shift(-2);
            let rhs = &j0 * &LaurentHalf::from_pairs([(1, 1), (-1, -1)]);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn cable_crossing_counts() {
        assert_eq!(trefoil().cable(2).unwrap().crossing_count(), 18);
        assert_eq!(figure_eight().cable(2).unwrap().crossing_count(), 16);
        assert!(matches!(trefoil().cable(3), Err(KnotError::CrossingBudget(45))));
    }

    #[test]
    fn cable_is_zero_framed() {
        for k in [trefoil(), trefoil().mirror(), figure_eight()] {
            let c = k.cable(2).unwrap();
            assert_eq!(c.components(), 2);
            // total writhe = self-writhes of both parallels; the linking part cancels
            assert_eq!(c.writhe(), 2 * k.writhe());
        }
    }
}
