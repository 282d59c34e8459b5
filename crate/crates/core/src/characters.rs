//! Refined characters of the `L^r` quotients, truncated product expansions,
//! the `a`-coefficient recursion and cell-by-cell comparison reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cartan::{ACoefficientTable, CartanData, DegreeVector, SlopeVector};
use crate::error::{Error, Result};
use crate::linalg::{rank_exact, rank_modular, ModularPolicy, QqMatrix};
use crate::pairing::{gram_for_key, gram_for_lr, CtOptions, RowPolicy};
use crate::slopes::{basis_plus_geq, slope_subalgebra_dim, word_span_dim};

/// Integer coefficients indexed by `(n, d)` on the window `0 <= n <= n_max`,
/// `0 <= d <= d_max`. Characters read the key as `q^{-n} v^d`, dimension
/// series as `q^n v^d`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradedSeries {
    pub n_max: DegreeVector,
    pub d_max: i64,
    coefficients: BTreeMap<(DegreeVector, i64), u64>,
}

pub type CharacterSeries = GradedSeries;
pub type DimSeries = GradedSeries;

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SeriesRecord {
    pub n: DegreeVector,
    pub d: i64,
    pub value: u64,
}

impl GradedSeries {
    pub fn zero(n_max: &DegreeVector, d_max: i64) -> Self {
        GradedSeries { n_max: n_max.clone(), d_max, coefficients: BTreeMap::new() }
    }

    pub fn one(n_max: &DegreeVector, d_max: i64) -> Self {
        let mut s = Self::zero(n_max, d_max);
        s.set(&DegreeVector::zeros(n_max.rank()), 0, 1);
        s
    }

    pub fn in_window(&self, n: &DegreeVector, d: i64) -> bool {
        n.is_nonnegative() && n.le(&self.n_max) && (0..=self.d_max).contains(&d)
    }

    pub fn get(&self, n: &DegreeVector, d: i64) -> u64 {
        self.coefficients.get(&(n.clone(), d)).copied().unwrap_or(0)
    }

    pub fn set(&mut self, n: &DegreeVector, d: i64, value: u64) {
        assert!(self.in_window(n, d), "cell outside the truncation window");
        if value == 0 {
            self.coefficients.remove(&(n.clone(), d));
        } else {
            self.coefficients.insert((n.clone(), d), value);
        }
    }

    /// Window cells in canonical order: `n` lexicographic, then `d` ascending.
    pub fn cells(&self) -> Vec<(DegreeVector, i64)> {
        window_cells(&self.n_max, self.d_max)
    }

    pub fn records(&self) -> Vec<SeriesRecord> {
        self.coefficients.iter().map(|((n, d), &value)| SeriesRecord { n: n.clone(), d: *d, value }).collect()
    }

    /// Multiplies by `(1 - X)^{-power}` with `X = q^m v^e`, truncated.
    pub fn mul_geometric(&mut self, m: &DegreeVector, e: i64, power: u64) {
        assert!(!(m.is_zero() && e == 0), "geometric factor needs a nonconstant monomial");
        assert!(m.is_nonnegative() && e >= 0);
        let cells = self.cells();
        for _ in 0..power {
            // Ascending order makes every source cell already updated.
            for (n, d) in &cells {
                let src_n = n - m;
                let src_d = d - e;
                if !self.in_window(&src_n, src_d) {
                    continue;
                }
                let add = self.get(&src_n, src_d);
                if add > 0 {
                    let v = self.get(n, *d).checked_add(add).expect("series coefficient overflow");
                    self.set(n, *d, v);
                }
            }
        }
    }

    /// Specializes `v -> 1`; the result lives at `d = 0`.
    pub fn collapse_v(&self) -> GradedSeries {
        let mut out = GradedSeries::zero(&self.n_max, 0);
        for ((n, _), &v) in &self.coefficients {
            let cur = out.get(n, 0);
            out.set(n, 0, cur + v);
        }
        out
    }
}

pub fn window_cells(n_max: &DegreeVector, d_max: i64) -> Vec<(DegreeVector, i64)> {
    let mut out = Vec::new();
    for n in n_max.box_below() {
        for d in 0..=d_max {
            out.push((n.clone(), d));
        }
    }
    out
}

/// `prod_{alpha} prod_{d=1}^{max(0, r·alpha)} 1/(1 - q^{-alpha} v^d)` with
/// multiplicities from an `a`-table; unrefined mode drops the `v` grading.
pub fn chi_product_from_table(table: &ACoefficientTable, r: &DegreeVector, n_max: &DegreeVector, d_max: i64, refined: bool) -> CharacterSeries {
    let mut s = if refined { GradedSeries::one(n_max, d_max) } else { GradedSeries::one(n_max, 0) };
    for (alpha, a) in table.support() {
        let top = r.dot(alpha).max(0);
        for d in 1..=top {
            s.mul_geometric(alpha, if refined { d } else { 0 }, a);
        }
    }
    s
}

pub fn chi_product(c: &CartanData, r: &DegreeVector, n_max: &DegreeVector, d_max: i64, refined: bool) -> Result<CharacterSeries> {
    c.check_rank(r)?;
    Ok(chi_product_from_table(&c.a_table(n_max)?, r, n_max, d_max, refined))
}

/// `prod_n prod_{d>=0} (1 - q^n v^d)^{-a_n}`.
pub fn conj_product(table: &ACoefficientTable, n_max: &DegreeVector, d_max: i64) -> DimSeries {
    let mut s = GradedSeries::one(n_max, d_max);
    for (m, a) in table.support() {
        for d in 0..=d_max {
            s.mul_geometric(m, d, a);
        }
    }
    s
}

/// How ranks are computed.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Modular,
    Both,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Mode::Exact),
            "modular" => Ok(Mode::Modular),
            "both" => Ok(Mode::Both),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Everything that determines a run besides the window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunSettings {
    pub mode: Mode,
    pub policy: ModularPolicy,
    pub rows: RowPolicy,
    /// Worker threads; `None` defers to `LOOPCHAR_THREADS`, then to rayon.
    pub threads: Option<usize>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings { mode: Mode::Exact, policy: ModularPolicy::default(), rows: RowPolicy::UntilFullRank, threads: None }
    }
}

impl RunSettings {
    pub fn with_mode(mode: Mode) -> Self {
        RunSettings { mode, ..Self::default() }
    }

    fn thread_count(&self) -> Option<usize> {
        self.threads.or_else(|| std::env::var("LOOPCHAR_THREADS").ok()?.trim().parse().ok()).filter(|&t| t > 0)
    }

    /// Maps cells concurrently; output order follows input order.
    fn map_cells<T, F>(&self, cells: &[(DegreeVector, i64)], f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&DegreeVector, i64) -> Result<T> + Sync + Send,
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = self.thread_count() {
            builder = builder.num_threads(t);
        }
        let run = || cells.par_iter().map(|(n, d)| f(n, *d)).collect::<Vec<_>>();
        let results = match builder.build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        };
        results.into_iter().collect()
    }
}

/// A rank and how it was established.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankOutcome {
    pub rank: usize,
    pub exact: Option<usize>,
    pub modular: Option<usize>,
    /// Specialization points disagreed, or the modular rank differed from the exact one.
    pub modular_unstable: bool,
}

pub fn rank_with(m: &QqMatrix, settings: &RunSettings) -> Result<RankOutcome> {
    if m.nrows() == 0 || m.ncols() == 0 {
        let (exact, modular) = match settings.mode {
            Mode::Exact => (Some(0), None),
            Mode::Modular => (None, Some(0)),
            Mode::Both => (Some(0), Some(0)),
        };
        return Ok(RankOutcome { rank: 0, exact, modular, modular_unstable: false });
    }
    let modular = match settings.mode {
        Mode::Exact => None,
        _ => Some(rank_modular(m, &settings.policy)?),
    };
    let need_exact = settings.mode != Mode::Modular || modular.as_ref().is_some_and(|r| r.unstable);
    let exact = need_exact.then(|| rank_exact(m));
    let mr = modular.as_ref().map(|r| r.rank);
    let modular_unstable = modular.as_ref().is_some_and(|r| r.unstable) || matches!((exact, mr), (Some(e), Some(k)) if e != k);
    Ok(RankOutcome { rank: exact.or(mr).expect("some rank path ran"), exact, modular: mr, modular_unstable })
}

/// `dim S_{<0|-n,d} / J^r_{n,d}`: the rank of the antipode-twisted Gram matrix.
pub fn lr_dim(c: &CartanData, r: &DegreeVector, n: &DegreeVector, d: i64, settings: &RunSettings) -> Result<RankOutcome> {
    c.require_finite_type()?;
    c.check_rank(r)?;
    c.check_rank(n)?;
    let trivial = |rank| RankOutcome { rank, exact: Some(rank), modular: None, modular_unstable: false };
    if d == 0 {
        return Ok(trivial(usize::from(n.is_zero())));
    }
    // No test word has letters >= -r summing to -d once d > r·n.
    if n.is_zero() || d < 0 || d > r.dot(n) {
        return Ok(trivial(0));
    }
    let g = gram_for_lr(c, r, n, d, settings.rows, CtOptions::default())?;
    rank_with(&g.entries, settings)
}

/// `chi_ref^r` on the window, computed from Gram ranks.
pub fn chi_refined(c: &CartanData, r: &DegreeVector, n_max: &DegreeVector, d_max: i64, settings: &RunSettings) -> Result<CharacterSeries> {
    let (series, _) = chi_refined_cells(c, r, n_max, d_max, settings)?;
    Ok(series)
}

fn chi_refined_cells(c: &CartanData, r: &DegreeVector, n_max: &DegreeVector, d_max: i64, settings: &RunSettings) -> Result<(CharacterSeries, Vec<RankOutcome>)> {
    c.require_finite_type()?;
    c.check_rank(n_max)?;
    let cells = window_cells(n_max, d_max);
    let outcomes = settings.map_cells(&cells, |n, d| lr_dim(c, r, n, d, settings))?;
    let mut s = GradedSeries::zero(n_max, d_max);
    for ((n, d), o) in cells.iter().zip(&outcomes) {
        s.set(n, *d, o.rank as u64);
    }
    Ok((s, outcomes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub n_max: DegreeVector,
    pub d_max: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellVerdict {
    pub n: DegreeVector,
    pub d: i64,
    pub computed: u64,
    pub formula: u64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub modular_unstable: bool,
}

/// Cell-by-cell comparison of computed dimensions against a closed formula.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub kind: String,
    pub cartan: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<DegreeVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<SlopeVector>>,
    pub window: Window,
    pub cells: Vec<CellVerdict>,
    pub pass: bool,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl VerificationReport {
    fn new(kind: &str, c: &CartanData, window: Window, cells: Vec<CellVerdict>) -> Self {
        let pass = cells.iter().all(|cell| cell.pass);
        VerificationReport { kind: kind.to_string(), cartan: c.to_string(), r: None, p: None, window, cells, pass, notes: Vec::new(), config: None }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellVerdict> {
        self.cells.iter().filter(|c| !c.pass)
    }

    pub fn any_unstable(&self) -> bool {
        self.cells.iter().any(|c| c.modular_unstable)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per cell; `n` is `;`-separated so the row stays comma-clean.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,d,computed,formula,pass\n");
        for cell in &self.cells {
            let n: Vec<String> = cell.n.entries().iter().map(i64::to_string).collect();
            let _ = writeln!(out, "{},{},{},{},{}", n.join(";"), cell.d, cell.computed, cell.formula, cell.pass);
        }
        out
    }
}

fn verdict(n: &DegreeVector, d: i64, computed: u64, formula: u64, mode: Option<Mode>, unstable: bool) -> CellVerdict {
    CellVerdict { n: n.clone(), d, computed, formula, pass: computed == formula, mode, modular_unstable: unstable }
}

/// Compares `chi_refined` against the product formula on every window cell.
pub fn verify_theorem(c: &CartanData, r: &DegreeVector, n_max: &DegreeVector, d_max: i64, settings: &RunSettings) -> Result<VerificationReport> {
    let formula = chi_product(c, r, n_max, d_max, true)?;
    let (computed, outcomes) = chi_refined_cells(c, r, n_max, d_max, settings)?;
    let cells = computed
        .cells()
        .into_iter()
        .zip(&outcomes)
        .map(|((n, d), o)| verdict(&n, d, computed.get(&n, d), formula.get(&n, d), Some(settings.mode), o.modular_unstable))
        .collect();
    let mut report = VerificationReport::new("verify-theorem", c, Window { n_max: n_max.clone(), d_max }, cells);
    report.r = Some(r.clone());
    Ok(report)
}

/// `dim S_{>=0|n,d}` against `prod_n prod_{d>=0} (1 - q^n v^d)^{-a_n}`.
pub fn dims_slope_geq0(c: &CartanData, n_max: &DegreeVector, d_max: i64, settings: &RunSettings) -> Result<VerificationReport> {
    c.require_finite_type()?;
    let formula = conj_product(&c.a_table(n_max)?, n_max, d_max);
    let zero = SlopeVector::zero(c.rank());
    let cells = window_cells(n_max, d_max);
    let dims = settings.map_cells(&cells, |n, d| {
        if n.is_zero() {
            return Ok(u64::from(d == 0));
        }
        Ok(basis_plus_geq(c, &zero, n, d)?.dim as u64)
    })?;
    let cells = cells.iter().zip(dims).map(|((n, d), k)| verdict(n, *d, k, formula.get(n, *d), None, false)).collect();
    Ok(VerificationReport::new("slope-geq0", c, Window { n_max: n_max.clone(), d_max }, cells))
}

/// `prod_{m: p·m in Z} (1 - q^m v^{p·m})^{-a_m}` as a series in `n` alone.
pub fn b_product(table: &ACoefficientTable, p: &SlopeVector, n_max: &DegreeVector) -> DimSeries {
    let mut s = GradedSeries::one(n_max, 0);
    for (m, a) in table.support() {
        if p.integral_dot(m).is_some() {
            s.mul_geometric(m, 0, a);
        }
    }
    s
}

/// `dim B_{p|n}` for `0 < n <= n_max` with `p·n` integral, against the product formula.
pub fn b_dim_series(c: &CartanData, p: &SlopeVector, n_max: &DegreeVector, settings: &RunSettings) -> Result<VerificationReport> {
    c.require_finite_type()?;
    let formula = b_product(&c.a_table(n_max)?, p, n_max);
    let cells: Vec<(DegreeVector, i64)> = n_max
        .patterns_below()
        .into_iter()
        .filter_map(|n| p.integral_dot(&n).map(|d| (n, d)))
        .collect();
    let dims = settings.map_cells(&cells, |n, _| Ok(slope_subalgebra_dim(c, p, n)? as u64))?;
    let cells = cells.iter().zip(dims).map(|((n, d), k)| verdict(n, *d, k, formula.get(n, 0), None, false)).collect();
    let d_max = n_max.patterns_below().iter().filter_map(|n| p.integral_dot(n)).max().unwrap_or(0);
    let mut report = VerificationReport::new("b-subalgebra", c, Window { n_max: n_max.clone(), d_max }, cells);
    report.p = Some(vec![p.clone()]);
    Ok(report)
}

/// Solves `sum_n dim B_{0|n} q^n = prod_n (1 - q^n)^{-a_n}` for `a`, degree by degree.
pub fn a_from_b_dims(bound: &DegreeVector, dims: &BTreeMap<DegreeVector, u64>) -> Result<ACoefficientTable> {
    let zero = DegreeVector::zeros(bound.rank());
    match dims.get(&zero) {
        Some(1) => {}
        Some(_) => return Err(Error::NonIntegerSolution(zero)),
        None => return Err(Error::MissingDimensionTable(zero)),
    }
    let mut order = bound.patterns_below();
    order.sort_by_key(|n| (n.total(), n.clone()));
    let mut product = GradedSeries::one(bound, 0);
    let mut table = ACoefficientTable::default();
    for n in order {
        let b = *dims.get(&n).ok_or_else(|| Error::MissingDimensionTable(n.clone()))?;
        // Factors already placed only reach `n` through strictly smaller degrees.
        let a = b.checked_sub(product.get(&n, 0)).ok_or_else(|| Error::NonIntegerSolution(n.clone()))?;
        if a > 0 {
            product.mul_geometric(&n, 0, a);
        }
        table.entries.insert(n, a);
    }
    Ok(table)
}

/// `prod_m prod_{d in Z, p1·m < d < p2·m, d >= 0} (1 - q^m v^d)^{-a_m}`.
pub fn key_product(table: &ACoefficientTable, p1: &SlopeVector, p2: &SlopeVector, n_max: &DegreeVector, d_max: i64) -> DimSeries {
    use std::cmp::Ordering;
    let mut s = GradedSeries::one(n_max, d_max);
    for (m, a) in table.support() {
        let (lo, hi) = (p1.dot(m), p2.dot(m));
        for d in 0..=d_max {
            if lo.cmp_int(d) == Ordering::Greater && hi.cmp_int(d) == Ordering::Less {
                s.mul_geometric(m, d, a);
            }
        }
    }
    s
}

/// Gram ranks for the band `p1 < slope < p2` against the restricted product.
pub fn key_dims(c: &CartanData, p1: &SlopeVector, p2: &SlopeVector, n_max: &DegreeVector, d_max: i64, settings: &RunSettings) -> Result<VerificationReport> {
    c.require_finite_type()?;
    if !p1.strictly_below(p2) {
        return Err(Error::EmptyBand);
    }
    let formula = key_product(&c.a_table(n_max)?, p1, p2, n_max, d_max);
    let cells = window_cells(n_max, d_max);
    let outcomes = settings.map_cells(&cells, |n, d| {
        if n.is_zero() {
            let k = usize::from(d == 0);
            return Ok(RankOutcome { rank: k, exact: Some(k), modular: None, modular_unstable: false });
        }
        let g = gram_for_key(c, p1, p2, n, d, settings.rows, CtOptions::default())?;
        rank_with(&g.entries, settings)
    })?;
    let cells = cells
        .iter()
        .zip(&outcomes)
        .map(|((n, d), o)| verdict(n, *d, o.rank as u64, formula.get(n, *d), Some(settings.mode), o.modular_unstable))
        .collect();
    let mut report = VerificationReport::new("band", c, Window { n_max: n_max.clone(), d_max }, cells);
    report.p = Some(vec![p1.clone(), p2.clone()]);
    Ok(report)
}

/// Spans of words with letters `>= 0` against the dimension product. In finite type
/// the product uses the root multiplicities; otherwise the `a`-values come from the
/// degree-zero word spans and the report is marked unverified.
pub fn word_span_dims(c: &CartanData, n_max: &DegreeVector, d_max: i64, settings: &RunSettings) -> Result<VerificationReport> {
    c.check_rank(n_max)?;
    let floor = vec![0i64; c.rank()];
    let cells = window_cells(n_max, d_max);
    let dims = settings.map_cells(&cells, |n, d| {
        if n.is_zero() {
            return Ok(u64::from(d == 0));
        }
        Ok(word_span_dim(c, n, d, &floor)? as u64)
    })?;
    let finite = c.is_finite_type();
    let table = if finite {
        c.a_table(n_max)?
    } else {
        let b: BTreeMap<DegreeVector, u64> = cells.iter().zip(&dims).filter(|((_, d), _)| *d == 0).map(|((n, _), &k)| (n.clone(), k)).collect();
        a_from_b_dims(n_max, &b)?
    };
    let formula = conj_product(&table, n_max, d_max);
    let cells = cells.iter().zip(dims).map(|((n, d), k)| verdict(n, *d, k, formula.get(n, *d), None, false)).collect();
    let mut report = VerificationReport::new("word-span", c, Window { n_max: n_max.clone(), d_max }, cells);
    if !finite {
        report.notes.push("exploratory: a-values recovered from degree-zero word spans; unverified beyond finite type".into());
    }
    Ok(report)
}
