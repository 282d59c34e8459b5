//! Exact rank and nullspace over `Q(q)`, and a modular rank path with agreement reporting.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalars::{inv_mod, mul_mod, sub_mod, ModEval, Qq, ScalarError, ZPoly, DEFAULT_PRIMES};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("every drawn specialization point hit a vanishing denominator; re-seed")]
    AllSpecializationsBad,
    #[error("row length {found} does not match column count {expected}")]
    Shape { expected: usize, found: usize },
    #[error("nullspace vector failed verification")]
    NullspaceCheck,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Dense matrix over `Q(q)` with row and column labels.
#[derive(Clone, Debug, PartialEq)]
pub struct QqMatrix {
    rows: Vec<Vec<Qq>>,
    ncols: usize,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl QqMatrix {
    pub fn new(ncols: usize) -> Self {
        QqMatrix {
            rows: Vec::new(),
            ncols,
            row_labels: Vec::new(),
            col_labels: (0..ncols).map(|j| format!("c{j}")).collect(),
        }
    }

    pub fn from_rows(rows: Vec<Vec<Qq>>) -> Result<Self, LinalgError> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(ncols);
        for (k, row) in rows.into_iter().enumerate() {
            m.push_row(format!("r{k}"), row)?;
        }
        Ok(m)
    }

    /// Parses rows of rational-function literals; test and CLI convenience.
    pub fn from_literals(rows: &[&[&str]]) -> Self {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| s.parse::<Qq>().expect("valid literal")).collect())
            .collect();
        Self::from_rows(parsed).expect("rectangular literal matrix")
    }

    pub fn set_col_labels(&mut self, labels: Vec<String>) {
        assert_eq!(labels.len(), self.ncols);
        self.col_labels = labels;
    }

    pub fn push_row(&mut self, label: String, row: Vec<Qq>) -> Result<(), LinalgError> {
        if row.len() != self.ncols {
            return Err(LinalgError::Shape { expected: self.ncols, found: row.len() });
        }
        self.rows.push(row);
        self.row_labels.push(label);
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<Qq>] {
        &self.rows
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn get(&self, i: usize, j: usize) -> &Qq {
        &self.rows[i][j]
    }

    pub fn mul_vec(&self, v: &[Qq]) -> Vec<Qq> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(v).fold(Qq::zero(), |acc, (a, b)| acc.add(&a.mul(b))))
            .collect()
    }

    /// Reorders columns; `perm[k]` is the old index of new column `k`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let rows = self.rows.iter().map(|r| perm.iter().map(|&j| r[j].clone()).collect()).collect();
        QqMatrix {
            rows,
            ncols: self.ncols,
            row_labels: self.row_labels.clone(),
            col_labels: perm.iter().map(|&j| self.col_labels[j].clone()).collect(),
        }
    }

    pub fn specialize(&self, at: &ModEval) -> Result<Vec<Vec<u64>>, ScalarError> {
        self.rows.iter().map(|r| r.iter().map(|x| at.specialize(x)).collect()).collect()
    }
}

/// Scales a row of `Q(q)` values to `Z[q]` polynomials with the same span.
fn clear_row(row: &[Qq]) -> Vec<ZPoly> {
    let nonzero: Vec<&Qq> = row.iter().filter(|x| !x.is_zero()).collect();
    if nonzero.is_empty() {
        return vec![ZPoly::zero(); row.len()];
    }
    let smin = nonzero.iter().map(|x| x.shift()).min().unwrap();
    let mut lcm = ZPoly::one();
    for x in &nonzero {
        if !x.denom().is_one() {
            let g = lcm.gcd(x.denom());
            lcm = lcm.mul(&x.denom().div_exact(&g).unwrap());
        }
    }
    row.iter()
        .map(|x| {
            if x.is_zero() {
                return ZPoly::zero();
            }
            let cof = lcm.div_exact(x.denom()).expect("lcm is a multiple");
            x.numer().mul(&cof).shift_up((x.shift() - smin) as usize)
        })
        .collect()
}

/// Rank over `Q(q)` by fraction-free Bareiss elimination with full pivoting.
///
/// Rows are first cleared to `Z[q]`; each step picks the smallest nonzero
/// remaining entry as pivot, and every division by the previous pivot is exact.
pub fn rank_exact(m: &QqMatrix) -> usize {
    let mut a: Vec<Vec<ZPoly>> = m.rows.iter().map(|r| clear_row(r)).filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    let nrows = a.len();
    let ncols = m.ncols;
    let full = nrows.min(ncols);
    let mut col_order: Vec<usize> = (0..ncols).collect();
    let mut prev = ZPoly::one();
    let mut rank = 0;
    while rank < full {
        let k = rank;
        let mut best: Option<(usize, usize)> = None;
        for i in k..nrows {
            for jj in k..ncols {
                let x = &a[i][col_order[jj]];
                if x.is_zero() {
                    continue;
                }
                if best.map_or(true, |(bi, bj)| x.cmp_by_size(&a[bi][col_order[bj]]).is_lt()) {
                    best = Some((i, jj));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(k, pi);
        col_order.swap(k, pj);
        let pc = col_order[k];
        let pivot = a[k][pc].clone();
        let (head, tail) = a.split_at_mut(k + 1);
        let prow = &head[k];
        for row in tail.iter_mut() {
            let lead = row[pc].clone();
            for &c in &col_order[k + 1..] {
                let updated = pivot.mul(&row[c]).sub(&lead.mul(&prow[c]));
                row[c] = updated.div_exact(&prev).expect("Bareiss division is exact");
            }
            row[pc] = ZPoly::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Rank of a matrix over `F_p`.
pub fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pr) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(rank, pr);
        let inv = inv_mod(rows[rank][col], p);
        for c in col..ncols {
            rows[rank][c] = mul_mod(rows[rank][c], inv, p);
        }
        let (head, tail) = rows.split_at_mut(rank + 1);
        let prow = &head[rank];
        for row in tail.iter_mut() {
            let f = row[col];
            if f == 0 {
                continue;
            }
            for c in col..ncols {
                row[c] = sub_mod(row[c], mul_mod(f, prow[c], p), p);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Specialization policy: every prime is paired with `points_per_prime` seeded draws.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularPolicy {
    pub primes: Vec<u64>,
    pub points_per_prime: usize,
    pub seed: u64,
    pub order_guard: u32,
}

impl Default for ModularPolicy {
    fn default() -> Self {
        ModularPolicy { primes: DEFAULT_PRIMES.to_vec(), points_per_prime: 2, seed: 0x5eed, order_guard: 64 }
    }
}

impl ModularPolicy {
    /// Deterministic specialization points drawn from the seed.
    pub fn points(&self) -> Result<Vec<ModEval>, ScalarError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::new();
        for &p in &self.primes {
            let mut drawn = 0;
            let mut attempts = 0;
            while drawn < self.points_per_prime {
                attempts += 1;
                let qv = rng.gen_range(2..p - 1);
                match ModEval::new(p, qv, self.order_guard) {
                    Ok(at) => {
                        out.push(at);
                        drawn += 1;
                    }
                    Err(e) if attempts > 1000 => return Err(e),
                    Err(_) => {}
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointRank {
    pub prime: u64,
    pub q_value: u64,
    /// `None` when a denominator vanished at this point.
    pub rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModularRank {
    pub rank: usize,
    pub points: Vec<PointRank>,
    /// Points disagreed; the maximum is still a valid lower bound for the exact rank.
    pub unstable: bool,
}

/// Rank at explicit points; the reported rank is the maximum over good points.
pub fn rank_at_points(m: &QqMatrix, points: &[ModEval]) -> Result<ModularRank, LinalgError> {
    let mut reports = Vec::with_capacity(points.len());
    for at in points {
        let rank = match m.specialize(at) {
            Ok(rows) => Some(rank_mod_p(rows, at.prime())),
            Err(ScalarError::BadSpecialization) => None,
            Err(e) => return Err(e.into()),
        };
        reports.push(PointRank { prime: at.prime(), q_value: at.q_value(), rank });
    }
    let good: Vec<usize> = reports.iter().filter_map(|r| r.rank).collect();
    let Some(&rank) = good.iter().max() else {
        return Err(LinalgError::AllSpecializationsBad);
    };
    let unstable = good.iter().any(|&r| r != rank) || good.len() < reports.len();
    Ok(ModularRank { rank, points: reports, unstable })
}

/// Rank via specialization at the policy's seeded points.
pub fn rank_modular(m: &QqMatrix, policy: &ModularPolicy) -> Result<ModularRank, LinalgError> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(ModularRank { rank: 0, points: Vec::new(), unstable: false });
    }
    rank_at_points(m, &policy.points()?)
}

/// Right kernel basis over `Q(q)` by Gauss-Jordan elimination; each vector is verified.
pub fn nullspace(m: &QqMatrix) -> Result<Vec<Vec<Qq>>, LinalgError> {
    let ncols = m.ncols;
    let mut rows: Vec<Vec<Qq>> = Vec::new();
    for r in &m.rows {
        if r.iter().any(|x| !x.is_zero()) && !rows.contains(r) {
            rows.push(r.clone());
        }
    }
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let best = (rank..rows.len())
            .filter(|&i| !rows[i][col].is_zero())
            .min_by_key(|&i| rows[i][col].size_metric());
        let Some(pr) = best else { continue };
        rows.swap(rank, pr);
        let inv = rows[rank][col].inv()?;
        for c in col..ncols {
            rows[rank][c] = rows[rank][c].mul(&inv);
        }
        let prow = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for c in col..ncols {
                if !prow[c].is_zero() {
                    row[c] = row[c].sub(&f.mul(&prow[c]));
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Qq::zero(); ncols];
        v[free] = Qq::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = rows[r][free].neg();
        }
        let v = primitive_vector(&v);
        if m.mul_vec(&v).iter().any(|x| !x.is_zero()) {
            return Err(LinalgError::NullspaceCheck);
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Rescales a nonzero vector so its entries lie in `Z[q]`, share no common
/// factor, and the first nonzero entry has positive leading coefficient.
pub fn primitive_vector(v: &[Qq]) -> Vec<Qq> {
    let cleared = clear_row(v);
    let g = cleared.iter().fold(ZPoly::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let first_neg = cleared
        .iter()
        .find(|x| !x.is_zero())
        .and_then(|x| x.lc())
        .is_some_and(|c| c < &BigInt::from(0));
    let g = if first_neg { g.neg() } else { g };
    cleared.iter().map(|x| Qq::from_laurent(x.div_exact(&g).expect("gcd divides"), 0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn lit(rows: &[&[&str]]) -> QqMatrix {
        QqMatrix::from_literals(rows)
    }

    #[test]
    fn exact_rank_examples() {
        assert_eq!(rank_exact(&lit(&[&["1"]])), 1);
        assert_eq!(rank_exact(&lit(&[&["q", "1"], &["q^2", "q"]])), 1);
        assert_eq!(rank_exact(&lit(&[&["0", "0"], &["0", "0"]])), 0);
        assert_eq!(rank_exact(&lit(&[&["1/(q-1)", "1"], &["1", "q-1"]])), 1);
        assert_eq!(rank_exact(&lit(&[&["1/(q-1)", "1"], &["1", "q+1"]])), 2);
    }

    #[test]
    fn adversarial_point_reports_instability() {
        let m = lit(&[&["q-1"]]);
        let p = DEFAULT_PRIMES[0];
        let points = [ModEval::new(p, 1, 0).unwrap(), ModEval::new(p, 3, 0).unwrap()];
        let r = rank_at_points(&m, &points).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.unstable);
        assert_eq!(r.points[0].rank, Some(0));
        assert_eq!(r.points[1].rank, Some(1));
    }

    #[test]
    fn zero_matrix_rank_zero_everywhere() {
        let m = lit(&[&["0", "0"], &["0", "0"]]);
        let r = rank_modular(&m, &ModularPolicy::default()).unwrap();
        assert_eq!(r.rank, 0);
        assert!(!r.unstable);
    }

    #[test]
    fn all_bad_points() {
        let m = lit(&[&["1/(q-3)"]]);
        let p = DEFAULT_PRIMES[0];
        let points = [ModEval::new(p, 3, 0).unwrap()];
        assert_eq!(rank_at_points(&m, &points), Err(LinalgError::AllSpecializationsBad));
    }

    #[test]
    fn nullspace_examples() {
        let id = lit(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]]);
        assert!(nullspace(&id).unwrap().is_empty());
        let k = nullspace(&lit(&[&["1", "-1"]])).unwrap();
        assert_eq!(k, vec![vec![Qq::one(), Qq::one()]]);
        let k = nullspace(&lit(&[&["q", "-1", "0"]])).unwrap();
        assert_eq!(k.len(), 2);
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, planted_rank: usize) -> QqMatrix {
        let rand_entry = |rng: &mut ChaCha8Rng| {
            let deg = rng.gen_range(0..3);
            let coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-3..=3)).collect();
            let num = Qq::from_laurent(ZPoly::from_i64s(&coeffs), rng.gen_range(-1..=1));
            if rng.gen_bool(0.2) {
                num.div(&Qq::from_laurent(ZPoly::from_i64s(&[1, 1]), 0)).unwrap()
            } else {
                num
            }
        };
        let basis: Vec<Vec<Qq>> = (0..planted_rank).map(|_| (0..n).map(|_| rand_entry(rng)).collect()).collect();
        let rows = (0..n)
            .map(|_| {
                let coefs: Vec<Qq> = (0..planted_rank).map(|_| rand_entry(rng)).collect();
                (0..n)
                    .map(|j| coefs.iter().zip(&basis).fold(Qq::zero(), |acc, (c, b)| acc.add(&c.mul(&b[j]))))
                    .collect()
            })
            .collect();
        QqMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn modular_matches_exact_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..50 {
            let planted = trial % 7;
            let m = random_matrix(&mut rng, 6, planted);
            let exact = rank_exact(&m);
            let modular = rank_modular(&m, &ModularPolicy::default()).unwrap();
            assert_eq!(exact, modular.rank, "trial {trial}");
            assert!(exact <= planted);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn rank_nullity_and_column_shuffles(seed in any::<u64>(), planted in 0usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, 5, planted);
            let rank = rank_exact(&m);
            let kernel = nullspace(&m).unwrap();
            prop_assert_eq!(rank + kernel.len(), m.ncols());
            let mut perm: Vec<usize> = (0..m.ncols()).collect();
            perm.shuffle(&mut rng);
            let shuffled = m.permute_columns(&perm);
            prop_assert_eq!(rank_exact(&shuffled), rank);
            prop_assert_eq!(nullspace(&shuffled).unwrap().len(), kernel.len());
        }
    }
}
