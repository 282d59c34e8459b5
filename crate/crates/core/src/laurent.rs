//! Sparse colored Laurent polynomials, orbit bases, scaling orders and wheel constraints.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::cartan::{CartanData, DegreeVector, ExtValue};
use crate::linalg::QqMatrix;
use crate::scalars::Qq;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LaurentError {
    #[error("operation needs a nonzero polynomial")]
    ZeroPolynomial,
    #[error("orbit enumeration needs a lower bound for every color")]
    InfinitePolytope,
    #[error("polynomial is not color-symmetric")]
    NotSymmetric,
    #[error("ambient degrees differ: {0} vs {1}")]
    AmbientMismatch(DegreeVector, DegreeVector),
    #[error("scaling pattern {0} is not within (0, {1}]")]
    BadPattern(DegreeVector, DegreeVector),
}

/// Variable `z[color, slot]`; colors are 0-based, slots 1-based as written.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId {
    pub color: usize,
    pub slot: usize,
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z[{},{}]", self.color + 1, self.slot)
    }
}

/// Flat exponent vector, color-major: color 0 slots first.
pub type Exponents = Vec<i32>;

/// Sparse Laurent polynomial in the variables of a fixed ambient degree `n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentPoly {
    ambient: DegreeVector,
    terms: BTreeMap<Exponents, Qq>,
}

fn offsets(ambient: &DegreeVector) -> Vec<usize> {
    let mut out = Vec::with_capacity(ambient.rank() + 1);
    let mut acc = 0;
    out.push(0);
    for &k in ambient.entries() {
        acc += k as usize;
        out.push(acc);
    }
    out
}

/// Calls `f` with every permutation of `0..n` and its sign (Heap's algorithm).
fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize], i32)) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1;
    f(&perm, sign);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            f(&perm, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// All color-preserving permutations of the flat variable list, with signs.
pub(crate) fn color_permutations(ambient: &DegreeVector) -> Vec<(Vec<usize>, i32)> {
    let offs = offsets(ambient);
    let mut acc: Vec<(Vec<usize>, i32)> = vec![(Vec::new(), 1)];
    for (i, &k) in ambient.entries().iter().enumerate() {
        let k = k as usize;
        let mut local = Vec::new();
        for_each_permutation(k, |p, s| local.push((p.iter().map(|x| x + offs[i]).collect::<Vec<_>>(), s)));
        let mut next = Vec::with_capacity(acc.len() * local.len());
        for (prefix, s0) in &acc {
            for (p, s) in &local {
                let mut v = prefix.clone();
                v.extend_from_slice(p);
                next.push((v, s0 * s));
            }
        }
        acc = next;
    }
    acc
}

impl LaurentPoly {
    pub fn zero(ambient: &DegreeVector) -> Self {
        LaurentPoly { ambient: ambient.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ambient: &DegreeVector, c: Qq) -> Self {
        let mut p = Self::zero(ambient);
        p.add_term(vec![0; ambient.total() as usize], c);
        p
    }

    pub fn monomial(ambient: &DegreeVector, exps: Exponents, c: Qq) -> Self {
        assert_eq!(exps.len(), ambient.total() as usize, "exponent vector length");
        let mut p = Self::zero(ambient);
        p.add_term(exps, c);
        p
    }

    pub fn var(ambient: &DegreeVector, v: VarId) -> Self {
        let mut e = vec![0; ambient.total() as usize];
        e[Self::index_in(ambient, v)] = 1;
        Self::monomial(ambient, e, Qq::one())
    }

    fn index_in(ambient: &DegreeVector, v: VarId) -> usize {
        assert!(v.color < ambient.rank() && v.slot >= 1 && v.slot as i64 <= ambient[v.color], "variable {v} outside ambient {ambient}");
        offsets(ambient)[v.color] + v.slot - 1
    }

    pub fn index_of(&self, v: VarId) -> usize {
        Self::index_in(&self.ambient, v)
    }

    pub fn var_of_index(&self, k: usize) -> VarId {
        let offs = offsets(&self.ambient);
        let color = (0..self.ambient.rank()).find(|&i| k < offs[i + 1]).expect("index in range");
        VarId { color, slot: k - offs[color] + 1 }
    }

    pub fn ambient(&self) -> &DegreeVector {
        &self.ambient
    }

    pub fn nvars(&self) -> usize {
        self.ambient.total() as usize
    }

    pub fn offsets(&self) -> Vec<usize> {
        offsets(&self.ambient)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Qq)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[i32]) -> Qq {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, exps: Exponents, c: Qq) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_ambient(&self, other: &Self) {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_ambient(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        LaurentPoly { ambient: self.ambient.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, c: &Qq) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ambient);
        }
        LaurentPoly { ambient: self.ambient.clone(), terms: self.terms.iter().map(|(e, x)| (e.clone(), x.mul(c))).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_ambient(other);
        let mut out = Self::zero(&self.ambient);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.mul(c2));
            }
        }
        out
    }

    /// Multiplies by the monomial with exponent vector `shift`.
    pub fn mul_monomial(&self, shift: &[i32]) -> Self {
        LaurentPoly {
            ambient: self.ambient.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.iter().zip(shift).map(|(a, b)| a + b).collect(), c.clone())).collect(),
        }
    }

    /// Multiplies by `(z_a - c z_b)` for flat variable indices `a != b`.
    pub fn mul_binomial(&self, a: usize, b: usize, c: &Qq) -> Self {
        let mut out = Self::zero(&self.ambient);
        for (e, x) in &self.terms {
            let mut ea = e.clone();
            ea[a] += 1;
            out.add_term(ea, x.clone());
            let mut eb = e.clone();
            eb[b] += 1;
            out.add_term(eb, x.mul(c).neg());
        }
        out
    }

    /// Exact division by `(z_a - z_b)`; `None` when it does not divide.
    pub fn div_difference(&self, a: usize, b: usize) -> Option<Self> {
        // Group by all exponents except those of z_a, z_b, keyed on the total a+b degree;
        // within a group the polynomial is homogeneous-in-(a,b) slices handled one by one.
        let mut groups: BTreeMap<(Exponents, i32), BTreeMap<i32, Qq>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let (ea, eb) = (e[a], e[b]);
            rest[a] = 0;
            rest[b] = 0;
            groups.entry((rest, ea + eb)).or_default().insert(ea, c.clone());
        }
        let mut out = Self::zero(&self.ambient);
        for ((rest, tot), slice) in groups {
            // slice(x) = sum_k g_k x^k y^(tot-k); divide by (x - y) via h_{k-1} = g_k + h_k (in y-units).
            let kmin = *slice.keys().next().unwrap();
            let kmax = *slice.keys().next_back().unwrap();
            let mut h = Qq::zero();
            for k in (kmin + 1..=kmax).rev() {
                h = slice.get(&k).cloned().unwrap_or_default().add(&h);
                let mut e = rest.clone();
                e[a] = k - 1;
                e[b] = tot - k;
                out.add_term(e, h.clone());
            }
            let remainder = slice.get(&kmin).cloned().unwrap_or_default().add(&h);
            if !remainder.is_zero() {
                return None;
            }
        }
        Some(out)
    }

    /// Applies a flat variable permutation: variable `k` becomes variable `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut out = Self::zero(&self.ambient);
        for (e, c) in &self.terms {
            let mut ne = vec![0; e.len()];
            for (k, &x) in e.iter().enumerate() {
                ne[perm[k]] = x;
            }
            out.add_term(ne, c.clone());
        }
        out
    }

    /// Sum over all color-preserving permutations (no normalization).
    pub fn symmetrize(&self) -> Self {
        let mut out = Self::zero(&self.ambient);
        for (perm, _) in color_permutations(&self.ambient) {
            for (e, c) in &self.terms {
                let mut ne = vec![0; e.len()];
                for (k, &x) in e.iter().enumerate() {
                    ne[perm[k]] = x;
                }
                out.add_term(ne, c.clone());
            }
        }
        out
    }

    /// Invariance under every adjacent same-color transposition.
    pub fn is_color_symmetric(&self) -> bool {
        let offs = self.offsets();
        for i in 0..self.ambient.rank() {
            for k in offs[i]..offs[i + 1].saturating_sub(1) {
                for (e, c) in &self.terms {
                    let mut sw = e.clone();
                    sw.swap(k, k + 1);
                    if self.terms.get(&sw) != Some(c) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Total degree if homogeneous (and nonzero).
    pub fn total_degree(&self) -> Option<i64> {
        let mut degs = self.terms.keys().map(|e| e.iter().map(|&x| x as i64).sum::<i64>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Coordinates in the orbit-sum basis; requires color symmetry.
    pub fn orbit_coordinates(&self) -> Result<BTreeMap<MonomialOrbit, Qq>, LaurentError> {
        let mut out = BTreeMap::new();
        for (e, c) in &self.terms {
            let orbit = MonomialOrbit::of_monomial(&self.ambient, e);
            if &orbit.representative() == e {
                out.insert(orbit, c.clone());
            }
        }
        let rebuilt = Self::from_orbits(&self.ambient, out.iter().map(|(o, c)| (o, c.clone())));
        if &rebuilt != self {
            return Err(LaurentError::NotSymmetric);
        }
        Ok(out)
    }

    /// `sum_O c_O * (orbit sum of O)`.
    pub fn from_orbits<'a>(ambient: &DegreeVector, coords: impl IntoIterator<Item = (&'a MonomialOrbit, Qq)>) -> Self {
        let mut out = Self::zero(ambient);
        for (orbit, c) in coords {
            for e in orbit.monomials() {
                out.add_term(e, c.clone());
            }
        }
        out
    }

    /// Reinterprets the polynomial inside a larger ambient: color `i` slot `a`
    /// maps to slot `a + slot_offset[i]`.
    pub fn embed(&self, target: &DegreeVector, slot_offset: &[usize]) -> Self {
        let src = self.offsets();
        let dst = offsets(target);
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut ne = vec![0; target.total() as usize];
            for i in 0..self.ambient.rank() {
                for a in 0..(src[i + 1] - src[i]) {
                    ne[dst[i] + slot_offset[i] + a] = e[src[i] + a];
                }
            }
            out.add_term(ne, c.clone());
        }
        out
    }

    /// Min (`ScaleEnd::Zero`) or max (`ScaleEnd::Infinity`) over monomials of the
    /// exponent sum on the first `m_i` slots of each color.
    pub fn scaled_order(&self, m: &DegreeVector, end: ScaleEnd) -> Result<i64, LaurentError> {
        if self.is_zero() {
            return Err(LaurentError::ZeroPolynomial);
        }
        if m.is_zero() || !m.is_nonnegative() || !m.le(&self.ambient) {
            return Err(LaurentError::BadPattern(m.clone(), self.ambient.clone()));
        }
        let offs = self.offsets();
        let sum_on = |e: &Exponents, from_end: bool| -> i64 {
            let mut s = 0i64;
            for i in 0..m.rank() {
                let (lo, hi) = (offs[i], offs[i + 1]);
                let k = m[i] as usize;
                let slots = if from_end { hi - k..hi } else { lo..lo + k };
                s += slots.map(|j| e[j] as i64).sum::<i64>();
            }
            s
        };
        let pick = |from_end: bool| {
            let it = self.terms.keys().map(|e| sum_on(e, from_end));
            match end {
                ScaleEnd::Zero => it.min().unwrap(),
                ScaleEnd::Infinity => it.max().unwrap(),
            }
        };
        let value = pick(false);
        debug_assert!(!self.is_color_symmetric() || pick(true) == value, "slot choice must not matter");
        Ok(value)
    }

    /// Literal form `c * z[i,a]^k * ...` joined by ` + `.
    pub fn to_literal(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (e, c) in &self.terms {
            let mut factors = vec![format!("({c})")];
            for (k, &x) in e.iter().enumerate() {
                if x != 0 {
                    let v = self.var_of_index(k);
                    factors.push(if x == 1 { v.to_string() } else { format!("{v}^{x}") });
                }
            }
            parts.push(factors.join(" * "));
        }
        parts.join(" + ")
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

/// Which end of the scaling `xi -> 0` or `xi -> infinity` is examined.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize)]
pub enum ScaleEnd {
    Zero,
    Infinity,
}

/// Monomial orbit under color-preserving permutations: sorted exponents per color.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MonomialOrbit {
    pub parts: Vec<Vec<i32>>,
}

impl Serialize for MonomialOrbit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

/// Distinct permutations of a sorted multiset, in lexicographic order.
fn multiset_permutations(sorted: &[i32]) -> Vec<Vec<i32>> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    loop {
        let n = cur.len();
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else { break };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
    out
}

impl MonomialOrbit {
    pub fn of_monomial(ambient: &DegreeVector, e: &[i32]) -> Self {
        let offs = offsets(ambient);
        let parts = (0..ambient.rank())
            .map(|i| {
                let mut p = e[offs[i]..offs[i + 1]].to_vec();
                p.sort_unstable();
                p
            })
            .collect();
        MonomialOrbit { parts }
    }

    pub fn ambient(&self) -> DegreeVector {
        DegreeVector::new(self.parts.iter().map(|p| p.len() as i64).collect())
    }

    pub fn representative(&self) -> Exponents {
        self.parts.concat()
    }

    pub fn total_degree(&self) -> i64 {
        self.parts.iter().flatten().map(|&x| x as i64).sum()
    }

    /// Every distinct monomial in the orbit.
    pub fn monomials(&self) -> Vec<Exponents> {
        let mut acc: Vec<Exponents> = vec![Vec::new()];
        for p in &self.parts {
            let local = multiset_permutations(p);
            let mut next = Vec::with_capacity(acc.len() * local.len());
            for prefix in &acc {
                for l in &local {
                    let mut v = prefix.clone();
                    v.extend_from_slice(l);
                    next.push(v);
                }
            }
            acc = next;
        }
        acc
    }

    pub fn orbit_sum(&self) -> LaurentPoly {
        LaurentPoly::from_orbits(&self.ambient(), [(self, Qq::one())])
    }

    /// Sum of the `m_i` smallest (`Zero`) or largest (`Infinity`) exponents per color.
    pub fn scaled_sum(&self, m: &DegreeVector, end: ScaleEnd) -> i64 {
        let mut s = 0i64;
        for (i, p) in self.parts.iter().enumerate() {
            let k = m[i] as usize;
            let slots = match end {
                ScaleEnd::Zero => &p[..k],
                ScaleEnd::Infinity => &p[p.len() - k..],
            };
            s += slots.iter().map(|&x| x as i64).sum::<i64>();
        }
        s
    }
}

/// Comparison used by prefix-sum constraints: `value REL threshold`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Relation {
    Ge,
    Gt,
    Le,
    Lt,
}

/// Prefix-sum condition on orbits: `scaled_sum(pattern, end) REL threshold`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PrefixConstraint {
    pub pattern: DegreeVector,
    pub end: ScaleEnd,
    pub relation: Relation,
    pub threshold: ExtValue,
}

impl PrefixConstraint {
    pub fn holds_for_value(&self, value: i64) -> bool {
        use std::cmp::Ordering::*;
        let ord = self.threshold.cmp_int(value);
        match self.relation {
            Relation::Ge => ord != Less,
            Relation::Gt => ord == Greater,
            Relation::Le => ord != Greater,
            Relation::Lt => ord == Less,
        }
    }

    pub fn holds(&self, orbit: &MonomialOrbit) -> bool {
        self.holds_for_value(orbit.scaled_sum(&self.pattern, self.end))
    }

    /// Per-slot lower bound implied for a single-slot pattern at `xi -> 0`.
    pub fn slot_lower_bound(&self) -> Option<(usize, i64)> {
        if self.end != ScaleEnd::Zero || self.pattern.total() != 1 {
            return None;
        }
        let color = self.pattern.entries().iter().position(|&x| x == 1)?;
        let ExtValue::Fin(t) = self.threshold else { return None };
        let fl = t.floor();
        let is_int = t.as_integer().is_some();
        let bound = match self.relation {
            Relation::Ge => if is_int { fl } else { fl + 1 },
            Relation::Gt => fl + 1,
            _ => return None,
        };
        Some((color, bound))
    }
}

impl PrefixConstraint {
    /// Per-slot upper bound implied for a single-slot pattern at `xi -> infinity`.
    pub fn slot_upper_bound(&self) -> Option<(usize, i64)> {
        if self.end != ScaleEnd::Infinity || self.pattern.total() != 1 {
            return None;
        }
        let color = self.pattern.entries().iter().position(|&x| x == 1)?;
        let ExtValue::Fin(t) = self.threshold else { return None };
        let fl = t.floor();
        let is_int = t.as_integer().is_some();
        let bound = match self.relation {
            Relation::Le => fl,
            Relation::Lt => if is_int { fl - 1 } else { fl },
            _ => return None,
        };
        Some((color, bound))
    }
}

/// All orbits of total degree `total` in ambient `n` with exponents of color `i`
/// at least `lower[i]`, filtered by `constraints`; lexicographic order.
pub fn orbit_enumerate(
    n: &DegreeVector,
    total: i64,
    lower: Option<&[i64]>,
    constraints: &[PrefixConstraint],
) -> Result<Vec<MonomialOrbit>, LaurentError> {
    let lower = lower.ok_or(LaurentError::InfinitePolytope)?;
    let counts = n.counts();
    let mut out = Vec::new();
    let mut parts: Vec<Vec<i32>> = counts.iter().map(|&k| Vec::with_capacity(k)).collect();
    // suffix_min[i] = minimal exponent mass needed by colors i.. given their lower bounds.
    let mut suffix_min = vec![0i64; counts.len() + 1];
    for i in (0..counts.len()).rev() {
        suffix_min[i] = suffix_min[i + 1] + lower[i] * counts[i] as i64;
    }
    fn rec(
        color: usize,
        remaining: i64,
        counts: &[usize],
        lower: &[i64],
        suffix_min: &[i64],
        parts: &mut Vec<Vec<i32>>,
        constraints: &[PrefixConstraint],
        out: &mut Vec<MonomialOrbit>,
    ) {
        if color == counts.len() {
            if remaining == 0 {
                let orbit = MonomialOrbit { parts: parts.clone() };
                if constraints.iter().all(|c| c.holds(&orbit)) {
                    out.push(orbit);
                }
            }
            return;
        }
        let filled = parts[color].len();
        if filled == counts[color] {
            rec(color + 1, remaining, counts, lower, suffix_min, parts, constraints, out);
            return;
        }
        let left_here = (counts[color] - filled) as i64;
        let floor = parts[color].last().map_or(lower[color], |&x| x as i64);
        // Remaining slots of this color take at least `x` each.
        let mut x = floor;
        while x * left_here + suffix_min[color + 1] <= remaining {
            parts[color].push(x as i32);
            rec(color, remaining - x, counts, lower, suffix_min, parts, constraints, out);
            parts[color].pop();
            x += 1;
        }
    }
    rec(0, total, &counts, lower, &suffix_min, &mut parts, constraints, &mut out);
    Ok(out)
}

/// One wheel substitution: `i`-colored slots `1..=k` go to `w q^{t d_ii}` and the
/// first `j`-colored slot to `w q^{-d_ij}`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct WheelInstance {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

/// Wheel instances applicable in horizontal degree `n`.
pub fn wheel_instances(c: &CartanData, n: &DegreeVector) -> Vec<WheelInstance> {
    let mut out = Vec::new();
    for i in 0..c.rank() {
        for j in 0..c.rank() {
            if i == j {
                continue;
            }
            let k = (1 - c.cartan_integer(i, j)) as usize;
            if n[i] >= k as i64 && n[j] >= 1 {
                out.push(WheelInstance { i, j, k });
            }
        }
    }
    out
}

/// Residual of `f` under a wheel substitution, keyed by the exponent of `w`
/// followed by the exponents of the unsubstituted variables.
pub fn wheel_substitute(c: &CartanData, f: &LaurentPoly, inst: WheelInstance) -> BTreeMap<Exponents, Qq> {
    let offs = f.offsets();
    let dii = c.d(inst.i, inst.i);
    let dij = c.d(inst.i, inst.j);
    let mut substituted: BTreeSet<usize> = (0..inst.k).map(|t| offs[inst.i] + t).collect();
    let jslot = offs[inst.j];
    substituted.insert(jslot);
    let mut out: BTreeMap<Exponents, Qq> = BTreeMap::new();
    for (e, coef) in f.terms() {
        let mut w = 0i32;
        let mut qpow = 0i64;
        for t in 0..inst.k {
            let x = e[offs[inst.i] + t];
            w += x;
            qpow += t as i64 * dii * x as i64;
        }
        w += e[jslot];
        qpow -= dij * e[jslot] as i64;
        let mut key = vec![w];
        key.extend(e.iter().enumerate().filter(|(k, _)| !substituted.contains(k)).map(|(_, &x)| x));
        let val = coef.mul(&Qq::q_pow(qpow));
        let slot = out.entry(key).or_insert_with(Qq::zero);
        *slot = slot.add(&val);
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Constraint matrix whose kernel is the set of orbit-coefficient vectors
/// satisfying every wheel condition. One row per (instance, residual monomial).
pub fn wheel_constraints(c: &CartanData, n: &DegreeVector, orbits: &[MonomialOrbit]) -> QqMatrix {
    let mut rows: BTreeMap<(usize, Exponents), Vec<Qq>> = BTreeMap::new();
    for (idx, inst) in wheel_instances(c, n).into_iter().enumerate() {
        for (col, orbit) in orbits.iter().enumerate() {
            for (key, val) in wheel_substitute(c, &orbit.orbit_sum(), inst) {
                let row = rows.entry((idx, key)).or_insert_with(|| vec![Qq::zero(); orbits.len()]);
                row[col] = val;
            }
        }
    }
    let mut m = QqMatrix::new(orbits.len());
    for ((idx, key), row) in rows {
        m.push_row(format!("wheel{idx}:{key:?}"), row).expect("row length matches");
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::SlopeVector;
    use proptest::prelude::*;

    fn dv(v: &[i64]) -> DegreeVector {
        DegreeVector::new(v.to_vec())
    }

    fn z(ambient: &DegreeVector, color: usize, slot: usize) -> LaurentPoly {
        LaurentPoly::var(ambient, VarId { color, slot })
    }

    #[test]
    fn symmetrize_examples() {
        let a = dv(&[2]);
        let z1 = z(&a, 0, 1);
        let z2 = z(&a, 0, 2);
        assert_eq!(z1.symmetrize(), z1.add(&z2));
        let prod = z1.mul(&z2);
        assert_eq!(prod.symmetrize(), prod.scale(&Qq::from_int(2)));
        let b = dv(&[1, 1]);
        assert_eq!(z(&b, 0, 1).symmetrize(), z(&b, 0, 1));
    }

    #[test]
    fn symmetry_examples() {
        let a = dv(&[2]);
        let (z1, z2) = (z(&a, 0, 1), z(&a, 0, 2));
        assert!(z1.add(&z2).is_color_symmetric());
        assert!(!z1.sub(&z2).is_color_symmetric());
        let f = z1.mul(&z1).mul(&z2).add(&z1.mul(&z2).mul(&z2));
        assert!(f.is_color_symmetric());
    }

    #[test]
    fn orbit_enumeration_examples() {
        let n = dv(&[2]);
        let parts = |v: Vec<MonomialOrbit>| v.into_iter().map(|o| o.parts[0].clone()).collect::<Vec<_>>();
        assert_eq!(parts(orbit_enumerate(&n, 2, Some(&[1]), &[]).unwrap()), vec![vec![1, 1]]);
        assert_eq!(parts(orbit_enumerate(&n, 3, Some(&[1]), &[]).unwrap()), vec![vec![1, 2]]);
        assert_eq!(parts(orbit_enumerate(&n, 2, Some(&[0]), &[]).unwrap()), vec![vec![0, 2], vec![1, 1]]);
        assert_eq!(orbit_enumerate(&n, 2, None, &[]), Err(LaurentError::InfinitePolytope));
    }

    #[test]
    fn scaled_order_examples() {
        let a = dv(&[2]);
        let (z1, z2) = (z(&a, 0, 1), z(&a, 0, 2));
        let f = z1.add(&z2);
        assert_eq!(f.scaled_order(&dv(&[1]), ScaleEnd::Zero), Ok(0));
        assert_eq!(f.scaled_order(&dv(&[2]), ScaleEnd::Zero), Ok(1));
        let g = LaurentPoly::monomial(&a, vec![2, -1], Qq::one());
        assert_eq!(g.scaled_order(&dv(&[1]), ScaleEnd::Infinity), Ok(2));
        assert_eq!(LaurentPoly::zero(&a).scaled_order(&dv(&[1]), ScaleEnd::Zero), Err(LaurentError::ZeroPolynomial));
    }

    #[test]
    fn difference_division() {
        let a = dv(&[2]);
        let (z1, z2) = (z(&a, 0, 1), z(&a, 0, 2));
        let f = z1.mul(&z1).sub(&z2.mul(&z2));
        assert_eq!(f.div_difference(0, 1), Some(z1.add(&z2)));
        assert_eq!(z1.div_difference(0, 1), None);
        let g = LaurentPoly::monomial(&a, vec![-1, 0], Qq::one()).sub(&LaurentPoly::monomial(&a, vec![0, -1], Qq::one()));
        // z1^-1 - z2^-1 = -(z1 - z2) / (z1 z2)
        let expected = LaurentPoly::monomial(&a, vec![-1, -1], Qq::from_int(-1));
        assert_eq!(g.div_difference(0, 1), Some(expected));
    }

    #[test]
    fn wheel_constraint_shapes() {
        let a1 = CartanData::catalog("A1").unwrap();
        let n = dv(&[3]);
        let orbits = orbit_enumerate(&n, 3, Some(&[0]), &[]).unwrap();
        assert_eq!(wheel_constraints(&a1, &n, &orbits).nrows(), 0);

        let a2 = CartanData::catalog("A2").unwrap();
        let n = dv(&[1, 1]);
        let orbits = orbit_enumerate(&n, 2, Some(&[0, 0]), &[]).unwrap();
        assert_eq!(wheel_constraints(&a2, &n, &orbits).nrows(), 0);

        let n = dv(&[2, 1]);
        let one = LaurentPoly::constant(&n, Qq::one());
        let inst = wheel_instances(&a2, &n);
        assert_eq!(inst, vec![WheelInstance { i: 0, j: 1, k: 2 }]);
        assert!(!wheel_substitute(&a2, &one, inst[0]).is_empty());
    }

    #[test]
    fn slot_lower_bounds_from_thresholds() {
        let p = SlopeVector::from_rationals(&[(1, 2)]);
        let c = PrefixConstraint { pattern: dv(&[1]), end: ScaleEnd::Zero, relation: Relation::Ge, threshold: p.dot(&dv(&[1])) };
        assert_eq!(c.slot_lower_bound(), Some((0, 1)));
        let c = PrefixConstraint { relation: Relation::Gt, threshold: ExtValue::Fin(crate::cartan::QSqrt2::integer(0)), ..c };
        assert_eq!(c.slot_lower_bound(), Some((0, 1)));
    }

    fn brute_force(n: &DegreeVector, total: i64, lower: &[i64], constraints: &[PrefixConstraint]) -> Vec<MonomialOrbit> {
        let nv = n.total() as usize;
        let lows: Vec<i64> = n.entries().iter().enumerate().flat_map(|(i, &k)| std::iter::repeat(lower[i]).take(k as usize)).collect();
        let low_sum: i64 = lows.iter().sum();
        let mut found = BTreeSet::new();
        let mut e = lows.clone();
        fn rec(k: usize, e: &mut Vec<i64>, lows: &[i64], total: i64, low_sum: i64, n: &DegreeVector, found: &mut BTreeSet<MonomialOrbit>) {
            if k == e.len() {
                if e.iter().sum::<i64>() == total {
                    let ex: Vec<i32> = e.iter().map(|&x| x as i32).collect();
                    found.insert(MonomialOrbit::of_monomial(n, &ex));
                }
                return;
            }
            for x in lows[k]..=lows[k] + (total - low_sum) {
                e[k] = x;
                rec(k + 1, e, lows, total, low_sum, n, found);
            }
            e[k] = lows[k];
        }
        if nv > 0 {
            rec(0, &mut e, &lows, total, low_sum, n, &mut found);
        }
        found.into_iter().filter(|o| constraints.iter().all(|c| c.holds(o))).collect()
    }

    proptest! {
        #[test]
        fn enumeration_matches_brute_force(n0 in 0i64..3, n1 in 0i64..3, total in -2i64..5, l0 in -1i64..2, l1 in -1i64..2, t in -2i64..4) {
            let n = dv(&[n0, n1]);
            let lower = [l0, l1];
            let constraints = if n0 > 0 {
                vec![PrefixConstraint { pattern: dv(&[1, 0]), end: ScaleEnd::Infinity, relation: Relation::Le, threshold: ExtValue::Fin(crate::cartan::QSqrt2::integer(t)) }]
            } else { vec![] };
            let fast = orbit_enumerate(&n, total, Some(&lower), &constraints).unwrap();
            let slow = brute_force(&n, total, &lower, &constraints);
            if n.total() == 0 {
                prop_assert_eq!(fast.len(), usize::from(total == 0));
            } else {
                prop_assert_eq!(fast, slow);
            }
        }

        #[test]
        fn symmetrize_output_is_symmetric(exps in proptest::collection::vec(-2i32..3, 3), c in -3i64..4) {
            let a = dv(&[2, 1]);
            let f = LaurentPoly::monomial(&a, exps.clone(), Qq::from_int(c));
            let s = f.symmetrize();
            prop_assert!(s.is_color_symmetric());
            // Orbit decomposition: the orbit coefficient equals c times the stabilizer size.
            let coords = s.orbit_coordinates().unwrap();
            if c != 0 {
                let orbit = MonomialOrbit::of_monomial(&a, &exps);
                let stab = 2 / orbit.monomials().len() as i64;
                prop_assert_eq!(coords.get(&orbit).cloned().unwrap(), Qq::from_int(c * stab));
            }
            // Symmetrizing a symmetric polynomial multiplies it by the group order.
            prop_assert_eq!(s.symmetrize(), s.scale(&Qq::from_int(2)));
        }

        #[test]
        fn scaled_order_additive_for_monomial_factor(e in proptest::collection::vec(-3i32..4, 2), g1 in proptest::collection::vec(-3i32..4, 2), g2 in proptest::collection::vec(-3i32..4, 2), m in 1i64..3) {
            let a = dv(&[2]);
            let f = LaurentPoly::monomial(&a, e, Qq::one());
            let g = LaurentPoly::monomial(&a, g1, Qq::one()).add(&LaurentPoly::monomial(&a, g2, Qq::from_int(2)));
            let m = dv(&[m]);
            for end in [ScaleEnd::Zero, ScaleEnd::Infinity] {
                let lhs = f.mul(&g).scaled_order(&m, end).unwrap();
                prop_assert_eq!(lhs, f.scaled_order(&m, end).unwrap() + g.scaled_order(&m, end).unwrap());
            }
        }
    }
}
