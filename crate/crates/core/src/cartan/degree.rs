use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Integer vector indexed by the colors: horizontal degrees, shifts, scaling patterns.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeVector(pub Vec<i64>);

impl DegreeVector {
    pub fn new(entries: Vec<i64>) -> Self {
        DegreeVector(entries)
    }

    pub fn zeros(rank: usize) -> Self {
        DegreeVector(vec![0; rank])
    }

    pub fn unit(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        DegreeVector(v)
    }

    pub fn splat(rank: usize, value: i64) -> Self {
        DegreeVector(vec![value; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Plain dot product `sum_i self_i * other_i`.
    pub fn dot(&self, other: &Self) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Counts as `usize`; the caller guarantees nonnegativity.
    pub fn counts(&self) -> Vec<usize> {
        self.0.iter().map(|&x| usize::try_from(x).expect("nonnegative degree")).collect()
    }

    /// `D(n) = sum_{i<j} n_i n_j`, the number of factors in the standard denominator.
    pub fn cross_pairs(&self) -> i64 {
        let mut acc = 0;
        for i in 0..self.0.len() {
            for j in i + 1..self.0.len() {
                acc += self.0[i] * self.0[j];
            }
        }
        acc
    }

    /// All vectors `m` with `0 <= m <= self`, in lexicographic order.
    pub fn box_below(&self) -> Vec<DegreeVector> {
        let mut out = vec![Vec::with_capacity(self.0.len())];
        for &hi in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (hi.max(0) as usize + 1));
            for prefix in &out {
                for x in 0..=hi.max(0) {
                    let mut v: Vec<i64> = prefix.clone();
                    v.push(x);
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(DegreeVector).collect()
    }

    /// All nonzero `m` with `0 < m <= self`.
    pub fn patterns_below(&self) -> Vec<DegreeVector> {
        self.box_below().into_iter().filter(|m| !m.is_zero()).collect()
    }
}

impl Index<usize> for DegreeVector {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl Add for &DegreeVector {
    type Output = DegreeVector;
    fn add(self, rhs: &DegreeVector) -> DegreeVector {
        assert_eq!(self.rank(), rhs.rank(), "rank mismatch");
        DegreeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &DegreeVector {
    type Output = DegreeVector;
    fn sub(self, rhs: &DegreeVector) -> DegreeVector {
        assert_eq!(self.rank(), rhs.rank(), "rank mismatch");
        DegreeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &DegreeVector {
    type Output = DegreeVector;
    fn neg(self) -> DegreeVector {
        DegreeVector(self.0.iter().map(|a| -a).collect())
    }
}

impl From<Vec<i64>> for DegreeVector {
    fn from(v: Vec<i64>) -> Self {
        DegreeVector(v)
    }
}

impl fmt::Display for DegreeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}
