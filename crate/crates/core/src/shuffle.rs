//! Shuffle elements as numerators over the standard denominator, the shuffle
//! product, generator words, shifts and wheel membership.

use std::fmt;

use serde::Serialize;

use crate::cartan::{CartanData, DegreeVector};
use crate::error::{Error, Result};
use crate::laurent::{wheel_instances, wheel_substitute, LaurentError, LaurentPoly};
use crate::scalars::Qq;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `+1` or `-1`.
    pub fn factor(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

/// `zeta_ij(x) = (x - q^shift) / (x - 1)` with `shift = -d_ij`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ZetaFactor {
    pub shift: i64,
}

impl ZetaFactor {
    /// The constant `q^{-d_ij}` in the numerator.
    pub fn numerator_constant(&self) -> Qq {
        Qq::q_pow(self.shift)
    }

    /// `d_ij = 0` makes the factor identically 1.
    pub fn is_trivial(&self) -> bool {
        self.shift == 0
    }

    pub fn eval(&self, x: &Qq) -> Result<Qq> {
        let num = x.sub(&self.numerator_constant());
        Ok(num.div(&x.sub(&Qq::one()))?)
    }
}

pub fn zeta_factor(c: &CartanData, i: usize, j: usize) -> ZetaFactor {
    ZetaFactor { shift: -c.d(i, j) }
}

/// Element of the plus or minus shuffle algebra: `numerator / prod_{i<j} prod (z_ia - z_jb)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ShuffleElement {
    sign: Sign,
    numerator: LaurentPoly,
}

impl ShuffleElement {
    /// Requires a color-symmetric numerator.
    pub fn new(sign: Sign, numerator: LaurentPoly) -> Result<Self> {
        if !numerator.is_color_symmetric() {
            return Err(LaurentError::NotSymmetric.into());
        }
        Ok(ShuffleElement { sign, numerator })
    }

    pub(crate) fn new_unchecked(sign: Sign, numerator: LaurentPoly) -> Self {
        debug_assert!(numerator.is_color_symmetric());
        ShuffleElement { sign, numerator }
    }

    /// The unit: empty variable set, numerator 1.
    pub fn one(rank: usize, sign: Sign) -> Self {
        ShuffleElement { sign, numerator: LaurentPoly::constant(&DegreeVector::zeros(rank), Qq::one()) }
    }

    pub fn zero(n: &DegreeVector, sign: Sign) -> Self {
        ShuffleElement { sign, numerator: LaurentPoly::zero(n) }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn hdeg(&self) -> &DegreeVector {
        self.numerator.ambient()
    }

    pub fn numerator(&self) -> &LaurentPoly {
        &self.numerator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// `(±n, d)` with `d = deg(numerator) - D(n)`.
    pub fn degrees(&self) -> Result<(DegreeVector, i64)> {
        let d = self.numerator.total_degree().ok_or(Error::Inhomogeneous)?;
        let n = self.hdeg();
        let signed = match self.sign {
            Sign::Plus => n.clone(),
            Sign::Minus => -n,
        };
        Ok((signed, d - n.cross_pairs()))
    }

    pub fn vdeg(&self) -> Result<i64> {
        Ok(self.degrees()?.1)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.sign != other.sign {
            return Err(Error::MixedSigns);
        }
        if self.hdeg() != other.hdeg() {
            return Err(Error::HdegMismatch(self.hdeg().clone(), other.hdeg().clone()));
        }
        Ok(ShuffleElement { sign: self.sign, numerator: self.numerator.add(&other.numerator) })
    }

    pub fn scale(&self, c: &Qq) -> Self {
        ShuffleElement { sign: self.sign, numerator: self.numerator.scale(c) }
    }
}

impl fmt::Display for ShuffleElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}] {}", self.sign, self.hdeg(), self.numerator)
    }
}

/// Subsets of `0..total` of size `k`, in lexicographic order.
fn subsets(total: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, total: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..total {
            if total - x < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, total, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, total, k, &mut Vec::new(), &mut out);
    out
}

/// Product in the plus algebra `V`; the minus product is the plus product of
/// the reversed operands.
pub fn shuffle_product(c: &CartanData, e1: &ShuffleElement, e2: &ShuffleElement) -> Result<ShuffleElement> {
    if e1.sign != e2.sign {
        return Err(Error::MixedSigns);
    }
    let (first, second) = match e1.sign {
        Sign::Plus => (e1, e2),
        Sign::Minus => (e2, e1),
    };
    let n1 = first.hdeg();
    let n2 = second.hdeg();
    c.check_rank(n1)?;
    c.check_rank(n2)?;
    let rank = c.rank();
    let n = n1 + n2;
    if n1.is_zero() {
        return Ok(ShuffleElement::new_unchecked(e1.sign, second.numerator.scale(&first.numerator.coeff(&[]))));
    }
    if n2.is_zero() {
        return Ok(ShuffleElement::new_unchecked(e1.sign, first.numerator.scale(&second.numerator.coeff(&[]))));
    }
    let zero_off = vec![0usize; rank];
    let second_off: Vec<usize> = n1.counts();
    let mut y = first.numerator.embed(&n, &zero_off).mul(&second.numerator.embed(&n, &second_off));

    let probe = LaurentPoly::zero(&n);
    let offs = probe.offsets();
    let (c1, c2) = (n1.counts(), n2.counts());
    let first_var = |i: usize, a: usize| offs[i] + a;
    let second_var = |j: usize, b: usize| offs[j] + c1[j] + b;

    // zeta_ij(z_ia / z_jb) numerators, with every ordered color pair including i = j.
    for i in 0..rank {
        for j in 0..rank {
            let k = Qq::q_pow(-c.d(i, j));
            for a in 0..c1[i] {
                for b in 0..c2[j] {
                    y = y.mul_binomial(first_var(i, a), second_var(j, b), &k);
                }
            }
        }
    }
    // Within-group Vandermondes make the summand antisymmetric under S_n x S_n'.
    let one = Qq::one();
    for i in 0..rank {
        for a in 0..c1[i] {
            for b in a + 1..c1[i] {
                y = y.mul_binomial(first_var(i, a), first_var(i, b), &one);
            }
        }
        for a in 0..c2[i] {
            for b in a + 1..c2[i] {
                y = y.mul_binomial(second_var(i, a), second_var(i, b), &one);
            }
        }
    }
    // Orientation of cross factors (z_ia - z_jb) with i > j against the standard denominator.
    let mut flips = 0i64;
    for i in 0..rank {
        for j in 0..i {
            flips += n1[i] * n2[j];
        }
    }

    // Sum over coset representatives (shuffles), signed.
    let per_color: Vec<Vec<(Vec<usize>, i32)>> = (0..rank)
        .map(|i| {
            let total = c1[i] + c2[i];
            subsets(total, c1[i])
                .into_iter()
                .map(|chosen| {
                    let inversions: usize = chosen.iter().enumerate().map(|(k, &p)| p - k).sum();
                    let rest: Vec<usize> = (0..total).filter(|x| !chosen.contains(x)).collect();
                    let mut perm = chosen;
                    perm.extend(rest);
                    (perm, if inversions % 2 == 0 { 1 } else { -1 })
                })
                .collect()
        })
        .collect();
    let mut acc = LaurentPoly::zero(&n);
    let mut idx = vec![0usize; rank];
    loop {
        let mut perm = vec![0usize; n.total() as usize];
        let mut sgn = 1;
        for i in 0..rank {
            let (p, s) = &per_color[i][idx[i]];
            sgn *= s;
            for (k, &target) in p.iter().enumerate() {
                perm[offs[i] + k] = offs[i] + target;
            }
        }
        let term = y.permute(&perm);
        acc = if sgn > 0 { acc.add(&term) } else { acc.sub(&term) };
        // Odometer over the per-color shuffle lists.
        let mut i = 0;
        while i < rank {
            idx[i] += 1;
            if idx[i] < per_color[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == rank {
            break;
        }
    }
    for i in 0..rank {
        let cnt = c1[i] + c2[i];
        for a in 0..cnt {
            for b in a + 1..cnt {
                acc = acc.div_difference(offs[i] + a, offs[i] + b).ok_or(Error::CancellationFailed)?;
            }
        }
    }
    if flips % 2 == 1 {
        acc = acc.neg();
    }
    Ok(ShuffleElement::new_unchecked(e1.sign, acc))
}

/// One generator letter `e_{i,d}` or `f_{i,d}`; colors are 0-based internally.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct Letter {
    pub color: usize,
    pub degree: i64,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct Word {
    pub sign: Sign,
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn new(sign: Sign, letters: Vec<Letter>) -> Self {
        Word { sign, letters }
    }

    pub fn plus(letters: &[(usize, i64)]) -> Self {
        Word { sign: Sign::Plus, letters: letters.iter().map(|&(color, degree)| Letter { color, degree }).collect() }
    }

    pub fn minus(letters: &[(usize, i64)]) -> Self {
        Word { sign: Sign::Minus, letters: letters.iter().map(|&(color, degree)| Letter { color, degree }).collect() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Unsigned horizontal degree.
    pub fn hdeg(&self, rank: usize) -> DegreeVector {
        let mut v = vec![0i64; rank];
        for l in &self.letters {
            v[l.color] += 1;
        }
        DegreeVector::new(v)
    }

    pub fn vdeg(&self) -> i64 {
        self.letters.iter().map(|l| l.degree).sum()
    }

    pub fn colors(&self) -> Vec<usize> {
        self.letters.iter().map(|l| l.color).collect()
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.letters.iter().map(|l| l.degree).collect()
    }

    /// Parses `e[i,d] e[i',d'] ...` (or `f[...]`), colors named as in the Cartan data.
    pub fn parse(c: &CartanData, text: &str) -> Result<Self> {
        let bad = || Error::BadWord(text.to_string());
        let mut sign = None;
        let mut letters = Vec::new();
        for tok in text.split(|ch: char| ch.is_whitespace() || ch == '*').filter(|t| !t.is_empty()) {
            let (s, rest) = match tok.split_at(1) {
                ("e", r) => (Sign::Plus, r),
                ("f", r) => (Sign::Minus, r),
                _ => return Err(bad()),
            };
            if sign.is_some_and(|x| x != s) {
                return Err(Error::MixedSigns);
            }
            sign = Some(s);
            let inner = rest.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
            let (col, deg) = inner.split_once(',').ok_or_else(bad)?;
            let color = c.colors().iter().position(|name| name == col.trim()).ok_or_else(bad)?;
            let degree: i64 = deg.trim().parse().map_err(|_| bad())?;
            letters.push(Letter { color, degree });
        }
        let sign = sign.ok_or_else(bad)?;
        Ok(Word { sign, letters })
    }

    /// Applies the shift `sigma_r` letterwise: `e_{i,d} -> e_{i,d+r_i}`, `f_{i,d} -> f_{i,d-r_i}`.
    pub fn shifted(&self, r: &DegreeVector) -> Self {
        let s = self.sign.factor();
        Word { sign: self.sign, letters: self.letters.iter().map(|l| Letter { color: l.color, degree: l.degree + s * r[l.color] }).collect() }
    }

    pub fn to_literal(&self, c: &CartanData) -> String {
        let head = match self.sign {
            Sign::Plus => "e",
            Sign::Minus => "f",
        };
        self.letters.iter().map(|l| format!("{head}[{},{}]", c.colors()[l.color], l.degree)).collect::<Vec<_>>().join(" ")
    }
}

/// Image of a generator word: iterated shuffle product of `z_{i1}^d`.
pub fn word_to_element(c: &CartanData, w: &Word) -> Result<ShuffleElement> {
    let rank = c.rank();
    let mut acc = ShuffleElement::one(rank, w.sign);
    for l in &w.letters {
        if l.color >= rank {
            return Err(Error::BadWord(format!("color index {} out of range", l.color + 1)));
        }
        let n = DegreeVector::unit(rank, l.color);
        let gen = ShuffleElement::new_unchecked(w.sign, LaurentPoly::monomial(&n, vec![l.degree as i32], Qq::one()));
        acc = shuffle_product(c, &acc, &gen)?;
    }
    Ok(acc)
}

/// `sigma_r`: numerator times `prod z_{ia}^{±r_i}`.
pub fn shift(e: &ShuffleElement, r: &DegreeVector) -> ShuffleElement {
    let s = e.sign.factor();
    let n = e.hdeg();
    let mut exps = Vec::with_capacity(n.total() as usize);
    for (i, &k) in n.entries().iter().enumerate() {
        exps.extend(std::iter::repeat((s * r[i]) as i32).take(k as usize));
    }
    ShuffleElement { sign: e.sign, numerator: e.numerator.mul_monomial(&exps) }
}

/// True iff every wheel substitution annihilates the numerator.
pub fn wheel_check(c: &CartanData, e: &ShuffleElement) -> Result<bool> {
    c.require_finite_type()?;
    Ok(wheel_instances(c, e.hdeg()).into_iter().all(|inst| wheel_substitute(c, &e.numerator, inst).is_empty()))
}
