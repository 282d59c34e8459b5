use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::DegreeVector;

/// Exact element `a + b*sqrt(2)` of `Q(sqrt 2)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct QSqrt2 {
    pub a: Rational64,
    pub b: Rational64,
}

impl QSqrt2 {
    pub fn new(a: Rational64, b: Rational64) -> Self {
        QSqrt2 { a, b }
    }

    pub fn rational(a: Rational64) -> Self {
        QSqrt2 { a, b: Rational64::zero() }
    }

    pub fn integer(k: i64) -> Self {
        Self::rational(Rational64::from_integer(k))
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The integer value, if this is one.
    pub fn as_integer(&self) -> Option<i64> {
        (self.b.is_zero() && self.a.is_integer()).then(|| self.a.to_integer())
    }

    pub fn add(&self, o: &Self) -> Self {
        QSqrt2 { a: self.a + o.a, b: self.b + o.b }
    }

    pub fn sub(&self, o: &Self) -> Self {
        QSqrt2 { a: self.a - o.a, b: self.b - o.b }
    }

    pub fn scale(&self, k: i64) -> Self {
        QSqrt2 { a: self.a * k, b: self.b * k }
    }

    pub fn neg(&self) -> Self {
        QSqrt2 { a: -self.a, b: -self.b }
    }

    /// Sign of `a + b*sqrt(2)`, decided exactly by comparing squares.
    pub fn signum(&self) -> Ordering {
        let (a, b) = (self.a, self.b);
        let sa = a.cmp(&Rational64::zero());
        let sb = b.cmp(&Rational64::zero());
        if sa == Ordering::Equal {
            return sb;
        }
        if sb == Ordering::Equal || sa == sb {
            return sa;
        }
        // Opposite signs: the term with the larger square wins.
        match (a * a).cmp(&(b * b * 2)) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => unreachable!("sqrt 2 is irrational"),
        }
    }

    /// Floor, exact.
    pub fn floor(&self) -> i64 {
        if self.b.is_zero() {
            return self.a.floor().to_integer();
        }
        // Bracket with a float estimate, then correct exactly.
        let approx = (*self.a.numer() as f64 / *self.a.denom() as f64)
            + (*self.b.numer() as f64 / *self.b.denom() as f64) * std::f64::consts::SQRT_2;
        let mut k = approx.floor() as i64;
        while self.cmp(&QSqrt2::integer(k)) == Ordering::Less {
            k -= 1;
        }
        while self.cmp(&QSqrt2::integer(k + 1)) != Ordering::Less {
            k += 1;
        }
        k
    }
}

impl Ord for QSqrt2 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).signum()
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let b_abs = self.b.abs();
        let b_str = if b_abs == Rational64::from_integer(1) { String::new() } else { b_abs.to_string() };
        if self.a.is_zero() {
            let sign = if self.b.is_negative() { "-" } else { "" };
            return write!(f, "{sign}{b_str}√2");
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        write!(f, "{}{sign}{b_str}√2", self.a)
    }
}

/// Extended value `-inf | a + b*sqrt(2) | +inf` used for slope thresholds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExtValue {
    NegInf,
    Fin(QSqrt2),
    PosInf,
}

impl ExtValue {
    pub fn add_int(&self, k: i64) -> Self {
        match self {
            ExtValue::Fin(x) => ExtValue::Fin(x.add(&QSqrt2::integer(k))),
            other => *other,
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            ExtValue::NegInf => ExtValue::PosInf,
            ExtValue::PosInf => ExtValue::NegInf,
            ExtValue::Fin(x) => ExtValue::Fin(x.neg()),
        }
    }

    /// Ordering of the integer `k` relative to `self`.
    pub fn cmp_int(&self, k: i64) -> Ordering {
        match self {
            ExtValue::NegInf => Ordering::Greater,
            ExtValue::PosInf => Ordering::Less,
            ExtValue::Fin(x) => QSqrt2::integer(k).cmp(x),
        }
    }
}

/// Slope vector `p`: finite coordinates in `Q(sqrt 2)` or a whole-vector infinity.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SlopeVector {
    NegInfinity,
    Finite(Vec<QSqrt2>),
    PosInfinity,
}

impl SlopeVector {
    pub fn from_integers(v: &[i64]) -> Self {
        SlopeVector::Finite(v.iter().map(|&k| QSqrt2::integer(k)).collect())
    }

    pub fn from_rationals(v: &[(i64, i64)]) -> Self {
        SlopeVector::Finite(v.iter().map(|&(n, d)| QSqrt2::rational(Rational64::new(n, d))).collect())
    }

    pub fn zero(rank: usize) -> Self {
        SlopeVector::Finite(vec![QSqrt2::default(); rank])
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SlopeVector::Finite(_))
    }

    /// `p . m` for `m > 0` (nonnegative, nonzero); sentinels give the matching infinity.
    pub fn dot(&self, m: &DegreeVector) -> ExtValue {
        match self {
            SlopeVector::NegInfinity => ExtValue::NegInf,
            SlopeVector::PosInfinity => ExtValue::PosInf,
            SlopeVector::Finite(p) => {
                assert_eq!(p.len(), m.rank(), "slope rank mismatch");
                let mut acc = QSqrt2::default();
                for (x, &k) in p.iter().zip(m.entries()) {
                    acc = acc.add(&x.scale(k));
                }
                ExtValue::Fin(acc)
            }
        }
    }

    /// `p . n` when it is an integer.
    pub fn integral_dot(&self, n: &DegreeVector) -> Option<i64> {
        match self.dot(n) {
            ExtValue::Fin(x) => x.as_integer(),
            _ => None,
        }
    }

    /// Componentwise strict order `self < other`, sentinels included.
    pub fn strictly_below(&self, other: &Self) -> bool {
        match (self, other) {
            (SlopeVector::PosInfinity, _) | (_, SlopeVector::NegInfinity) => false,
            (SlopeVector::NegInfinity, _) | (_, SlopeVector::PosInfinity) => true,
            (SlopeVector::Finite(a), SlopeVector::Finite(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x < y)
            }
        }
    }

    /// Adds an integer shift vector.
    pub fn shifted(&self, r: &DegreeVector) -> Self {
        match self {
            SlopeVector::Finite(p) => SlopeVector::Finite(
                p.iter().zip(r.entries()).map(|(x, &k)| x.add(&QSqrt2::integer(k))).collect(),
            ),
            other => other.clone(),
        }
    }
}

impl fmt::Display for SlopeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlopeVector::NegInfinity => f.write_str("-inf"),
            SlopeVector::PosInfinity => f.write_str("+inf"),
            SlopeVector::Finite(p) => {
                let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl Serialize for SlopeVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SlopeVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse slope literal `{0}`")]
pub struct SlopeParseError(pub String);

fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        return (d != 0).then(|| Rational64::new(n, d));
    }
    Some(Rational64::from_integer(s.parse().ok()?))
}

impl FromStr for QSqrt2 {
    type Err = SlopeParseError;

    /// Accepts `a`, `a/b`, `c√2`, `a+c√2`, `a-c/d√2`; `sqrt2`, `sqrt(2)` and `r2`
    /// are accepted spellings of `√2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || SlopeParseError(s.to_string());
        let norm = s
            .replace("sqrt(2)", "√2")
            .replace("sqrt2", "√2")
            .replace("r2", "√2")
            .replace(' ', "");
        if norm.is_empty() {
            return Err(err());
        }
        // Split into signed terms.
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (k, ch) in norm.chars().enumerate() {
            if (ch == '+' || ch == '-') && k > 0 && !cur.ends_with('/') && !cur.is_empty() {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut value = QSqrt2::default();
        for t in terms {
            let (neg, body) = match t.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, t.trim_start_matches('+').to_string()),
            };
            let term = if let Some(coef) = body.strip_suffix("√2") {
                let coef = coef.trim_end_matches('*');
                let c = if coef.is_empty() { Rational64::from_integer(1) } else { parse_rational(coef).ok_or_else(err)? };
                QSqrt2::new(Rational64::zero(), c)
            } else {
                QSqrt2::rational(parse_rational(&body).ok_or_else(err)?)
            };
            value = if neg { value.sub(&term) } else { value.add(&term) };
        }
        Ok(value)
    }
}

impl FromStr for SlopeVector {
    type Err = SlopeParseError;

    /// Comma-separated coordinates, or `inf`, `+inf`, `-inf`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "-inf" | "-∞" => return Ok(SlopeVector::NegInfinity),
            "inf" | "+inf" | "∞" | "+∞" => return Ok(SlopeVector::PosInfinity),
            _ => {}
        }
        let coords = s.split(',').map(str::parse).collect::<Result<Vec<QSqrt2>, _>>()?;
        Ok(SlopeVector::Finite(coords))
    }
}

/// Outcome of the bounded genericity test.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Genericity {
    /// Every integral point in the window is a multiple of `generator` (`None` means only 0).
    Generic { generator: Option<DegreeVector>, bound: DegreeVector },
    /// Two non-collinear window points with integral pairing.
    NotGeneric { witnesses: (DegreeVector, DegreeVector), bound: DegreeVector },
}

fn collinear(a: &DegreeVector, b: &DegreeVector) -> bool {
    let r = a.rank();
    for i in 0..r {
        for j in i + 1..r {
            if a[i] * b[j] != a[j] * b[i] {
                return false;
            }
        }
    }
    true
}

/// Decides, within `|n_i| <= bound_i`, whether `{n : p.n in Z}` lies in a line `Z m`.
///
/// Window points are scanned by increasing L1 norm, nonnegative vectors first,
/// so witnesses and generators are the smallest available.
pub fn is_generic(p: &SlopeVector, bound: &DegreeVector) -> Genericity {
    let SlopeVector::Finite(coords) = p else {
        return Genericity::Generic { generator: None, bound: bound.clone() };
    };
    let rank = coords.len();
    let mut points: Vec<DegreeVector> = Vec::new();
    let mut ranges: Vec<Vec<i64>> = vec![Vec::new()];
    for i in 0..rank {
        let b = bound[i].abs();
        let mut next = Vec::new();
        for prefix in &ranges {
            for x in -b..=b {
                let mut v = prefix.clone();
                v.push(x);
                next.push(v);
            }
        }
        ranges = next;
    }
    for v in ranges {
        let v = DegreeVector::new(v);
        if v.is_zero() {
            continue;
        }
        let mut acc = QSqrt2::default();
        for (x, &k) in coords.iter().zip(v.entries()) {
            acc = acc.add(&x.scale(k));
        }
        if acc.as_integer().is_some() {
            points.push(v);
        }
    }
    points.sort_by_key(|v| {
        let l1: i64 = v.entries().iter().map(|x| x.abs()).sum();
        let negs = v.entries().iter().filter(|&&x| x < 0).count();
        (l1, negs, std::cmp::Reverse(v.clone()))
    });
    let Some(first) = points.first().cloned() else {
        return Genericity::Generic { generator: None, bound: bound.clone() };
    };
    if let Some(other) = points.iter().find(|w| !collinear(&first, w)) {
        return Genericity::NotGeneric { witnesses: (first, other.clone()), bound: bound.clone() };
    }
    // All collinear: the generator is the gcd of the multiples along the primitive direction.
    let g = first.entries().iter().fold(0i64, |acc, &x| acc.gcd(&x));
    let prim: Vec<i64> = first.entries().iter().map(|x| x / g).collect();
    let lead = prim.iter().position(|&x| x != 0).unwrap();
    let mut step = 0i64;
    for w in &points {
        step = step.gcd(&(w[lead] / prim[lead]));
    }
    let sign = if prim[lead] < 0 { -1 } else { 1 };
    let generator = DegreeVector::new(prim.iter().map(|x| x * step * sign).collect());
    Genericity::Generic { generator: Some(generator), bound: bound.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QSqrt2 {
        s.parse().unwrap()
    }

    #[test]
    fn parses_quadratic_literals() {
        assert_eq!(q("1+√2"), QSqrt2::new(1.into(), 1.into()));
        assert_eq!(q("1-sqrt2"), QSqrt2::new(1.into(), (-1).into()));
        assert_eq!(q("-1/2"), QSqrt2::rational(Rational64::new(-1, 2)));
        assert_eq!(q("3/2*√2"), QSqrt2::new(0.into(), Rational64::new(3, 2)));
        assert!("x".parse::<QSqrt2>().is_err());
    }

    #[test]
    fn exact_comparison_with_integers() {
        let x = q("1+√2");
        assert_eq!(ExtValue::Fin(x).cmp_int(2), Ordering::Less);
        assert_eq!(ExtValue::Fin(x).cmp_int(3), Ordering::Greater);
        assert_eq!(x.floor(), 2);
        assert_eq!(q("1-√2").floor(), -1);
        assert_eq!(q("-7/2").floor(), -4);
    }

    #[test]
    fn rank_one_is_generic() {
        let v = is_generic(&SlopeVector::from_integers(&[1]), &DegreeVector::new(vec![6]));
        assert_eq!(
            v,
            Genericity::Generic { generator: Some(DegreeVector::new(vec![1])), bound: DegreeVector::new(vec![6]) }
        );
    }

    #[test]
    fn half_integers_are_not_generic() {
        let p = SlopeVector::from_rationals(&[(1, 2), (1, 2)]);
        match is_generic(&p, &DegreeVector::new(vec![4, 4])) {
            Genericity::NotGeneric { witnesses: (a, b), .. } => {
                assert!(p.integral_dot(&a).is_some());
                assert!(p.integral_dot(&b).is_some());
                assert!(!collinear(&a, &b));
            }
            other => panic!("expected non-generic, got {other:?}"),
        }
    }

    #[test]
    fn conjugate_irrationals_are_generic_along_diagonal() {
        let p: SlopeVector = "1+√2,1-√2".parse().unwrap();
        let v = is_generic(&p, &DegreeVector::new(vec![6, 6]));
        assert_eq!(
            v,
            Genericity::Generic {
                generator: Some(DegreeVector::new(vec![1, 1])),
                bound: DegreeVector::new(vec![6, 6])
            }
        );
    }

    #[test]
    fn sentinels_dominate() {
        let m = DegreeVector::new(vec![1, 0]);
        assert_eq!(SlopeVector::NegInfinity.dot(&m).cmp_int(-1000), Ordering::Greater);
        assert!(SlopeVector::NegInfinity.strictly_below(&SlopeVector::zero(2)));
        assert!(!SlopeVector::zero(2).strictly_below(&SlopeVector::zero(2)));
    }
}
