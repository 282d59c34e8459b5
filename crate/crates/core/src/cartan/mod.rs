//! Symmetrized Cartan data, positive roots, `a`-coefficient tables and slope vectors.

mod degree;
mod slope_vector;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

pub use degree::DegreeVector;
pub use slope_vector::{is_generic, ExtValue, Genericity, QSqrt2, SlopeParseError, SlopeVector};

/// Roots beyond this count mean the reflection closure is not terminating.
const ROOT_CLOSURE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CartanError {
    #[error("matrix is empty or not square")]
    NotSquare,
    #[error("matrix is not symmetric at ({0},{1})")]
    NonSymmetric(usize, usize),
    #[error("diagonal entry d_{0}{0} must be positive and even")]
    PositivityViolation(usize),
    #[error("gcd of the diagonal is {0}, expected 2")]
    GcdViolation(i64),
    #[error("off-diagonal entry d_{0}{1} is positive")]
    SignViolation(usize, usize),
    #[error("2 d_{0}{1} / d_{0}{0} is not an integer")]
    IntegralityViolation(usize, usize),
    #[error("Cartan data is not of finite type")]
    NotFiniteType,
    #[error("unknown Cartan type `{0}`")]
    UnknownType(String),
    #[error("vector of rank {found} given for Cartan data of rank {expected}")]
    RankMismatch { expected: usize, found: usize },
}

/// Validated symmetric matrix `(d_ij)`: `d_ii` positive and even with gcd 2,
/// `d_ij = d_ji <= 0` off the diagonal, and `2 d_ij / d_ii` integral.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CartanData {
    colors: Vec<String>,
    d: Vec<Vec<i64>>,
    finite_type_tag: Option<String>,
}

#[derive(Deserialize)]
struct CartanJson {
    d: Vec<Vec<i64>>,
}

impl CartanData {
    pub fn validate(d: Vec<Vec<i64>>) -> Result<Self, CartanError> {
        let r = d.len();
        if r == 0 || d.iter().any(|row| row.len() != r) {
            return Err(CartanError::NotSquare);
        }
        for i in 0..r {
            for j in 0..r {
                if d[i][j] != d[j][i] {
                    return Err(CartanError::NonSymmetric(i, j));
                }
            }
        }
        for i in 0..r {
            if d[i][i] <= 0 || d[i][i] % 2 != 0 {
                return Err(CartanError::PositivityViolation(i));
            }
        }
        let g = (0..r).fold(0i64, |g, i| g.gcd(&d[i][i]));
        if g != 2 {
            return Err(CartanError::GcdViolation(g));
        }
        for i in 0..r {
            for j in 0..r {
                if i != j && d[i][j] > 0 {
                    return Err(CartanError::SignViolation(i, j));
                }
                if (2 * d[i][j]) % d[i][i] != 0 {
                    return Err(CartanError::IntegralityViolation(i, j));
                }
            }
        }
        let colors = (1..=r).map(|i| i.to_string()).collect();
        Ok(CartanData { colors, d, finite_type_tag: None })
    }

    /// Catalog lookup: `A_n`, `B_n`, `C_n`, `D_n`, `E6`-`E8`, `F4`, `G2`.
    ///
    /// Normalization: simply-laced types use `d_ii = 2`; in `B_n`, `C_n`, `F4` long
    /// roots have `d_ii = 4`; in `G2` the short root is color 1 (`d = 2`) and the
    /// long root color 2 (`d = 6`). Bourbaki numbering throughout.
    pub fn catalog(name: &str) -> Result<Self, CartanError> {
        let unknown = || CartanError::UnknownType(name.to_string());
        let mut chars = name.trim().chars();
        let family = chars.next().ok_or_else(unknown)?.to_ascii_uppercase();
        let rank: usize = chars.as_str().parse().map_err(|_| unknown())?;
        let mut d = vec![vec![0i64; rank]; rank];
        let link = |d: &mut Vec<Vec<i64>>, i: usize, j: usize, v: i64| {
            d[i][j] = v;
            d[j][i] = v;
        };
        match (family, rank) {
            ('A', r) if r >= 1 => {
                for i in 0..r {
                    d[i][i] = 2;
                    if i + 1 < r {
                        link(&mut d, i, i + 1, -1);
                    }
                }
            }
            ('B', r) if r >= 2 => {
                for i in 0..r {
                    d[i][i] = if i + 1 < r { 4 } else { 2 };
                    if i + 1 < r {
                        link(&mut d, i, i + 1, -2);
                    }
                }
            }
            ('C', r) if r >= 2 => {
                for i in 0..r {
                    d[i][i] = if i + 1 < r { 2 } else { 4 };
                    if i + 2 < r {
                        link(&mut d, i, i + 1, -1);
                    } else if i + 1 < r {
                        link(&mut d, i, i + 1, -2);
                    }
                }
            }
            ('D', r) if r >= 4 => {
                for i in 0..r {
                    d[i][i] = 2;
                }
                for i in 0..r - 2 {
                    link(&mut d, i, i + 1, -1);
                }
                link(&mut d, r - 3, r - 1, -1);
            }
            ('E', r) if (6..=8).contains(&r) => {
                for i in 0..r {
                    d[i][i] = 2;
                }
                link(&mut d, 0, 2, -1);
                link(&mut d, 1, 3, -1);
                for i in 2..r - 1 {
                    link(&mut d, i, i + 1, -1);
                }
            }
            ('F', 4) => {
                d = vec![vec![4, -2, 0, 0], vec![-2, 4, -2, 0], vec![0, -2, 2, -1], vec![0, 0, -1, 2]];
            }
            ('G', 2) => {
                d = vec![vec![2, -3], vec![-3, 6]];
            }
            _ => return Err(unknown()),
        }
        let mut c = Self::validate(d).expect("catalog entries are valid");
        c.finite_type_tag = Some(format!("{family}{rank}"));
        Ok(c)
    }

    /// Parses `{"d": [[...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self, CartanError> {
        let parsed: CartanJson =
            serde_json::from_str(text).map_err(|e| CartanError::UnknownType(format!("bad JSON: {e}")))?;
        Self::validate(parsed.d)
    }

    pub fn rank(&self) -> usize {
        self.d.len()
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }

    pub fn tag(&self) -> Option<&str> {
        self.finite_type_tag.as_deref()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.d
    }

    pub fn d(&self, i: usize, j: usize) -> i64 {
        self.d[i][j]
    }

    /// `<alpha_j, alpha_i^vee> = 2 d_ij / d_ii`.
    pub fn cartan_integer(&self, i: usize, j: usize) -> i64 {
        2 * self.d[i][j] / self.d[i][i]
    }

    /// Symmetric form `(m, n) = sum_ij m_i n_j d_ij`.
    pub fn form(&self, m: &DegreeVector, n: &DegreeVector) -> i64 {
        let mut acc = 0;
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                acc += m[i] * n[j] * self.d[i][j];
            }
        }
        acc
    }

    pub fn check_rank(&self, v: &DegreeVector) -> Result<(), CartanError> {
        if v.rank() != self.rank() {
            return Err(CartanError::RankMismatch { expected: self.rank(), found: v.rank() });
        }
        Ok(())
    }

    /// Finite type iff the symmetrized matrix is positive definite (leading minors).
    pub fn is_finite_type(&self) -> bool {
        if self.finite_type_tag.is_some() {
            return true;
        }
        let r = self.rank();
        let mut m: Vec<Vec<i128>> = self.d.iter().map(|row| row.iter().map(|&x| x as i128).collect()).collect();
        let mut prev = 1i128;
        for k in 0..r {
            if m[k][k] <= 0 {
                return false;
            }
            for i in k + 1..r {
                for j in k + 1..r {
                    m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]) / prev;
                }
            }
            prev = m[k][k];
        }
        true
    }

    pub fn require_finite_type(&self) -> Result<(), CartanError> {
        if self.is_finite_type() {
            Ok(())
        } else {
            Err(CartanError::NotFiniteType)
        }
    }

    /// Positive roots in the simple-root basis, sorted by height then lexicographically.
    pub fn positive_roots(&self) -> Result<RootSystem, CartanError> {
        let r = self.rank();
        let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
        let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
        for i in 0..r {
            let v = DegreeVector::unit(r, i).0;
            seen.insert(v.clone());
            queue.push_back(v);
        }
        while let Some(beta) = queue.pop_front() {
            for i in 0..r {
                // s_i(beta) = beta - <beta, alpha_i^vee> alpha_i
                let pairing: i64 = (0..r).map(|j| beta[j] * self.cartan_integer(i, j)).sum();
                let mut image = beta.clone();
                image[i] -= pairing;
                if image.iter().all(|&x| x >= 0) && image.iter().any(|&x| x > 0) && seen.insert(image.clone()) {
                    if seen.len() > ROOT_CLOSURE_CAP {
                        return Err(CartanError::NotFiniteType);
                    }
                    queue.push_back(image);
                }
            }
        }
        let mut roots: Vec<DegreeVector> = seen.into_iter().map(DegreeVector).collect();
        roots.sort_by_key(|v| (v.total(), v.clone()));
        Ok(RootSystem { positive_roots: roots })
    }

    /// Finite-type `a`-table: 1 at positive roots, 0 elsewhere, for `0 < n <= bound`.
    pub fn a_table(&self, bound: &DegreeVector) -> Result<ACoefficientTable, CartanError> {
        self.check_rank(bound)?;
        self.require_finite_type()?;
        let roots: BTreeSet<DegreeVector> = self.positive_roots()?.positive_roots.into_iter().collect();
        let entries = bound
            .patterns_below()
            .into_iter()
            .map(|n| {
                let a = u64::from(roots.contains(&n));
                (n, a)
            })
            .collect();
        Ok(ACoefficientTable { entries })
    }
}

impl FromStr for CartanData {
    type Err = CartanError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::catalog(s)
    }
}

impl fmt::Display for CartanData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.finite_type_tag {
            Some(t) => f.write_str(t),
            None => write!(f, "{:?}", self.d),
        }
    }
}

/// `{"n": [...], "value": k}` record used by root and coefficient listings.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DegreeValue {
    pub n: DegreeVector,
    pub value: u64,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RootSystem {
    pub positive_roots: Vec<DegreeVector>,
}

impl RootSystem {
    pub fn len(&self) -> usize {
        self.positive_roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive_roots.is_empty()
    }

    pub fn records(&self) -> Vec<DegreeValue> {
        self.positive_roots.iter().map(|n| DegreeValue { n: n.clone(), value: 1 }).collect()
    }
}

/// Exponents `a_n` of the graded-dimension product, for `0 < n <= bound`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ACoefficientTable {
    pub entries: BTreeMap<DegreeVector, u64>,
}

impl ACoefficientTable {
    pub fn get(&self, n: &DegreeVector) -> u64 {
        self.entries.get(n).copied().unwrap_or(0)
    }

    pub fn records(&self) -> Vec<DegreeValue> {
        self.entries.iter().map(|(n, &value)| DegreeValue { n: n.clone(), value }).collect()
    }

    /// Nonzero entries only.
    pub fn support(&self) -> impl Iterator<Item = (&DegreeVector, u64)> {
        self.entries.iter().filter(|(_, &a)| a > 0).map(|(n, &a)| (n, a))
    }
}
