//! Slope conditions as monomial-support constraints, bases of slope subspaces
//! in finite type, slope-subalgebra dimensions and word-span ranks.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cartan::{CartanData, DegreeVector, SlopeVector};
use crate::error::{Error, Result};
use crate::laurent::{orbit_enumerate, wheel_constraints, LaurentError, LaurentPoly, MonomialOrbit, PrefixConstraint, Relation, ScaleEnd};
use crate::linalg::{nullspace, primitive_vector, rank_exact, rank_modular, ModularPolicy, QqMatrix};
use crate::scalars::Qq;
use crate::shuffle::{word_to_element, Letter, ShuffleElement, Sign, Word};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize)]
pub enum SlopeKind {
    Geq,
    Gt,
    Leq,
    Lt,
}

impl SlopeKind {
    pub const ALL: [SlopeKind; 4] = [SlopeKind::Geq, SlopeKind::Gt, SlopeKind::Leq, SlopeKind::Lt];
}

/// Denominator factors with both endpoints scaled: `sum_{i<j} m_i m_j`.
pub fn both_scaled(m: &DegreeVector) -> i64 {
    m.cross_pairs()
}

/// Denominator factors with at least one endpoint scaled.
pub fn touched(n: &DegreeVector, m: &DegreeVector) -> i64 {
    n.cross_pairs() - (n - m).cross_pairs()
}

/// Support constraints, one per scaling pattern `0 < m <= n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SlopeConstraintSet {
    pub n: DegreeVector,
    pub constraints: Vec<PrefixConstraint>,
}

impl SlopeConstraintSet {
    pub fn new(n: &DegreeVector, sign: Sign, p: &SlopeVector, kind: SlopeKind) -> Self {
        use SlopeKind::*;
        let (end, relation, flip) = match (sign, kind) {
            (Sign::Plus, Geq) => (ScaleEnd::Zero, Relation::Ge, false),
            (Sign::Plus, Gt) => (ScaleEnd::Zero, Relation::Gt, false),
            (Sign::Plus, Leq) => (ScaleEnd::Infinity, Relation::Le, false),
            (Sign::Plus, Lt) => (ScaleEnd::Infinity, Relation::Lt, false),
            (Sign::Minus, Leq) => (ScaleEnd::Zero, Relation::Ge, true),
            (Sign::Minus, Lt) => (ScaleEnd::Zero, Relation::Gt, true),
            (Sign::Minus, Geq) => (ScaleEnd::Infinity, Relation::Le, true),
            (Sign::Minus, Gt) => (ScaleEnd::Infinity, Relation::Lt, true),
        };
        let constraints = n
            .patterns_below()
            .into_iter()
            .map(|m| {
                let pm = p.dot(&m);
                let base = if flip { pm.neg() } else { pm };
                let correction = match end {
                    ScaleEnd::Zero => both_scaled(&m),
                    ScaleEnd::Infinity => touched(n, &m),
                };
                PrefixConstraint { pattern: m, end, relation, threshold: base.add_int(correction) }
            })
            .collect();
        SlopeConstraintSet { n: n.clone(), constraints }
    }

    pub fn merged(mut self, other: SlopeConstraintSet) -> Self {
        assert_eq!(self.n, other.n, "constraint sets for different degrees");
        self.constraints.extend(other.constraints);
        self
    }

    pub fn holds(&self, orbit: &MonomialOrbit) -> bool {
        self.constraints.iter().all(|c| c.holds(orbit))
    }

    /// Per-color exponent lower bounds: from single-slot `xi -> 0` patterns, or,
    /// when every occupied color has an upper bound, from the fixed total degree.
    pub fn lower_bounds(&self, total: i64) -> Option<Vec<i64>> {
        let k = self.n.rank();
        let mut lower: Vec<Option<i64>> = vec![None; k];
        let mut upper: Vec<Option<i64>> = vec![None; k];
        for c in &self.constraints {
            if let Some((color, b)) = c.slot_lower_bound() {
                lower[color] = Some(lower[color].map_or(b, |x: i64| x.max(b)));
            }
            if let Some((color, b)) = c.slot_upper_bound() {
                upper[color] = Some(upper[color].map_or(b, |x: i64| x.min(b)));
            }
        }
        let occupied = |i: usize| self.n[i] > 0;
        let upper_mass: Option<i64> = (0..k).filter(|&i| occupied(i)).map(|i| upper[i].map(|u| u * self.n[i])).sum();
        (0..k)
            .map(|i| {
                if !occupied(i) {
                    return Some(0);
                }
                let from_total = upper_mass.map(|mass| total - (mass - upper[i].unwrap()));
                match (lower[i], from_total) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                }
            })
            .collect()
    }
}

/// Support-level slope test on a homogeneous element; zero passes every test.
pub fn slope_test(e: &ShuffleElement, p: &SlopeVector, kind: SlopeKind) -> Result<bool> {
    if e.is_zero() {
        return Ok(true);
    }
    e.degrees()?;
    let set = SlopeConstraintSet::new(e.hdeg(), e.sign(), p, kind);
    for c in &set.constraints {
        let value = e.numerator().scaled_order(&c.pattern, c.end)?;
        if !c.holds_for_value(value) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Orbit polytope plus wheel nullspace: a basis of the whole subspace.
    Rational,
    /// Span of word images: a lower bound, labeled non-rigorous.
    WordSpan,
}

/// Basis of a graded slope subspace, in orbit-sum coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct SubspaceBasis {
    pub sign: Sign,
    pub n: DegreeVector,
    pub d: i64,
    pub dim: usize,
    pub orbits: Vec<MonomialOrbit>,
    #[serde(serialize_with = "serialize_vectors")]
    pub vectors: Vec<Vec<Qq>>,
    pub provenance: Provenance,
}

fn serialize_vectors<S: serde::Serializer>(v: &[Vec<Qq>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let strings: Vec<Vec<String>> = v.iter().map(|row| row.iter().map(|x| x.to_string()).collect()).collect();
    strings.serialize(s)
}

impl SubspaceBasis {
    pub fn numerators(&self) -> Vec<LaurentPoly> {
        self.vectors
            .iter()
            .map(|v| LaurentPoly::from_orbits(&self.n, self.orbits.iter().zip(v).filter(|(_, c)| !c.is_zero()).map(|(o, c)| (o, c.clone()))))
            .collect()
    }

    pub fn elements(&self) -> Vec<ShuffleElement> {
        self.numerators().into_iter().map(|r| ShuffleElement::new(self.sign, r).expect("orbit sums are symmetric")).collect()
    }
}

fn build_basis(c: &CartanData, sign: Sign, n: &DegreeVector, d: i64, set: &SlopeConstraintSet) -> Result<SubspaceBasis> {
    c.require_finite_type()?;
    c.check_rank(n)?;
    let total = d + n.cross_pairs();
    let lower = set.lower_bounds(total).ok_or(LaurentError::InfinitePolytope)?;
    let orbits = orbit_enumerate(n, total, Some(&lower), &set.constraints)?;
    let wheel = wheel_constraints(c, n, &orbits);
    let vectors: Vec<Vec<Qq>> = if wheel.nrows() == 0 {
        (0..orbits.len())
            .map(|k| {
                let mut v = vec![Qq::zero(); orbits.len()];
                v[k] = Qq::one();
                v
            })
            .collect()
    } else {
        nullspace(&wheel)?.iter().map(|v| primitive_vector(v)).collect()
    };
    Ok(SubspaceBasis { sign, n: n.clone(), d, dim: vectors.len(), orbits, vectors, provenance: Provenance::Rational })
}

/// Basis of `S_{<0|-n,d}`.
pub fn basis_minus_strictneg(c: &CartanData, n: &DegreeVector, d: i64) -> Result<SubspaceBasis> {
    let set = SlopeConstraintSet::new(n, Sign::Minus, &SlopeVector::zero(n.rank()), SlopeKind::Lt);
    build_basis(c, Sign::Minus, n, d, &set)
}

/// Basis of `S_{>=p|n,d}`.
pub fn basis_plus_geq(c: &CartanData, p: &SlopeVector, n: &DegreeVector, d: i64) -> Result<SubspaceBasis> {
    let set = SlopeConstraintSet::new(n, Sign::Plus, p, SlopeKind::Geq);
    build_basis(c, Sign::Plus, n, d, &set)
}

/// Basis of `S^-_{>p1} ∩ S^-_{<p2}` at `(-n, d)`.
pub fn basis_minus_band(c: &CartanData, p1: &SlopeVector, p2: &SlopeVector, n: &DegreeVector, d: i64) -> Result<SubspaceBasis> {
    if !p1.strictly_below(p2) {
        return Err(Error::EmptyBand);
    }
    let set = SlopeConstraintSet::new(n, Sign::Minus, p1, SlopeKind::Gt).merged(SlopeConstraintSet::new(n, Sign::Minus, p2, SlopeKind::Lt));
    build_basis(c, Sign::Minus, n, d, &set)
}

/// `dim B_{p|n}`: slope both `>= p` and `<= p` at vertical degree `p·n`.
pub fn slope_subalgebra_dim(c: &CartanData, p: &SlopeVector, n: &DegreeVector) -> Result<usize> {
    c.require_finite_type()?;
    let Some(d) = p.integral_dot(n) else { return Ok(0) };
    let set = SlopeConstraintSet::new(n, Sign::Plus, p, SlopeKind::Geq).merged(SlopeConstraintSet::new(n, Sign::Plus, p, SlopeKind::Leq));
    Ok(build_basis(c, Sign::Plus, n, d, &set)?.dim)
}

/// Distinct color sequences with the given multiplicities, lexicographic.
pub fn orderings(n: &DegreeVector) -> Vec<Vec<usize>> {
    let mut sorted: Vec<usize> = Vec::new();
    for (i, &k) in n.entries().iter().enumerate() {
        sorted.extend(std::iter::repeat(i).take(k as usize));
    }
    let mut out = vec![sorted.clone()];
    let mut cur = sorted;
    loop {
        let len = cur.len();
        let Some(i) = (0..len.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else { break };
        let j = (i + 1..len).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
    out
}

/// All integer sequences `x_a >= floors[a]` with `sum x_a = total`, lexicographic.
pub fn compositions(floors: &[i64], total: i64) -> Vec<Vec<i64>> {
    fn rec(k: usize, floors: &[i64], remaining: i64, suffix: &[i64], cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if k == floors.len() {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut x = floors[k];
        while x + suffix[k + 1] <= remaining {
            cur.push(x);
            rec(k + 1, floors, remaining - x, suffix, cur, out);
            cur.pop();
            x += 1;
        }
    }
    let mut suffix = vec![0i64; floors.len() + 1];
    for k in (0..floors.len()).rev() {
        suffix[k] = suffix[k + 1] + floors[k];
    }
    let mut out = Vec::new();
    if suffix[0] <= total {
        rec(0, floors, total, &suffix, &mut Vec::new(), &mut out);
    }
    out
}

/// Words of hdeg `n` over every ordering, letters `>= floor[color]`, degrees summing to `d`.
pub fn words_with_floor(sign: Sign, n: &DegreeVector, d: i64, floor: &[i64]) -> Vec<Word> {
    let mut out = Vec::new();
    for ord in orderings(n) {
        let floors: Vec<i64> = ord.iter().map(|&i| floor[i]).collect();
        for degs in compositions(&floors, d) {
            let letters = ord.iter().zip(&degs).map(|(&color, &degree)| Letter { color, degree }).collect();
            out.push(Word::new(sign, letters));
        }
    }
    out
}

/// Rank of the span of word images with letters `>= letter_floor`, in orbit coordinates.
/// Rows are screened modularly, then the selected rows are ranked exactly.
pub fn word_span_dim(c: &CartanData, n: &DegreeVector, d: i64, letter_floor: &[i64]) -> Result<usize> {
    c.check_rank(n)?;
    let words = words_with_floor(Sign::Plus, n, d, letter_floor);
    let mut columns: BTreeMap<MonomialOrbit, usize> = BTreeMap::new();
    let mut rows: Vec<BTreeMap<usize, Qq>> = Vec::new();
    for w in &words {
        let e = word_to_element(c, w)?;
        let coords = e.numerator().orbit_coordinates()?;
        let mut row = BTreeMap::new();
        for (o, x) in coords {
            let next = columns.len();
            let k = *columns.entry(o).or_insert(next);
            row.insert(k, x);
        }
        rows.push(row);
    }
    let ncols = columns.len();
    let dense = |r: &BTreeMap<usize, Qq>| (0..ncols).map(|k| r.get(&k).cloned().unwrap_or_default()).collect::<Vec<_>>();
    let policy = ModularPolicy::default();
    let mut selected = QqMatrix::new(ncols);
    let mut current = 0usize;
    for (w, r) in words.iter().zip(&rows) {
        if current == ncols {
            break;
        }
        let mut trial = selected.clone();
        trial.push_row(w.to_literal(c), dense(r))?;
        let rk = rank_modular(&trial, &policy)?.rank;
        if rk > current {
            selected = trial;
            current = rk;
        }
    }
    Ok(rank_exact(&selected))
}
