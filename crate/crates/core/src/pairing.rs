//! Constant terms of rational integrands in nested contour regimes, the
//! shuffle pairing and its antipode twist, and Gram matrices of test families.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::cartan::{CartanData, DegreeVector, SlopeVector};
use crate::error::{Error, Result};
use crate::linalg::{ModularPolicy, QqMatrix};
use crate::scalars::{mul_mod, sub_mod, inv_mod, Coeff, ModEval, QLaurent, Qq};
use crate::shuffle::{ShuffleElement, Sign, Word};
use crate::slopes::{basis_minus_band, basis_minus_strictneg, words_with_floor, SubspaceBasis};

/// Magnitude regime of the contours.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum Regime {
    /// `|z_1| >> |z_2| >> ... >> |z_n|`.
    Descending,
    /// `|z_1| << |z_2| << ... << |z_n|`.
    Ascending,
}

impl Regime {
    /// Variables from largest to smallest.
    pub fn magnitude_order(self, n: usize) -> Vec<usize> {
        match self {
            Regime::Descending => (0..n).collect(),
            Regime::Ascending => (0..n).rev().collect(),
        }
    }

    /// `(-1)^n` for the antipode side, 1 otherwise.
    fn twist(self, n: usize) -> i64 {
        match self {
            Regime::Descending => 1,
            Regime::Ascending if n % 2 == 0 => 1,
            Regime::Ascending => -1,
        }
    }
}

/// The binomial `z_x - c z_y`.
#[derive(Clone, PartialEq, Debug)]
pub struct Binomial {
    pub x: usize,
    pub y: usize,
    pub c: Qq,
}

/// `scalar * numerator * prod(numer_factors) / prod(denom_factors)` in ordered
/// variables `z_0..z_{n-1}`, expanded with `order[0]` the largest variable.
#[derive(Clone, PartialEq, Debug)]
pub struct RegimeIntegrand {
    pub nvars: usize,
    pub numerator: BTreeMap<Vec<i32>, Qq>,
    pub numer_factors: Vec<Binomial>,
    pub denom_factors: Vec<Binomial>,
    pub order: Vec<usize>,
    pub scalar: Qq,
}

/// Truncation settings for geometric expansions.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct CtOptions {
    /// Added to the cap derived from the exponent spread; negative values
    /// deliberately under-truncate and exist to exercise the certificate.
    pub cap_offset: i64,
    /// Recompute with caps + 1 and demand agreement.
    pub certify: bool,
}

impl Default for CtOptions {
    fn default() -> Self {
        CtOptions { cap_offset: 0, certify: true }
    }
}

/// One expansion `sum_k w_k y^k` in the ratio `y = z_small / z_large`, which is
/// the product of the ratio coordinates `x_lo .. x_{hi-1}`.
#[derive(Clone, PartialEq, Debug)]
struct SeriesSpec {
    lo: usize,
    hi: usize,
    /// Denominator `1 - kappa y`.
    kappa: Qq,
    /// Paired numerator `1 - kappa_num y`, if any.
    kappa_num: Option<Qq>,
}

/// Factor data after pulling out the dominant variable of every binomial.
#[derive(Clone, PartialEq, Debug)]
struct FactorPlan {
    nvars: usize,
    order: Vec<usize>,
    scalar: Qq,
    monomial: Vec<i32>,
    leftover_numerators: Vec<Binomial>,
    series: Vec<SeriesSpec>,
}

/// (prefactor scalar, prefactor variable, small variable, large variable, kappa)
type Normalized = (Qq, usize, usize, usize, Qq);

impl FactorPlan {
    fn new(nvars: usize, numer: &[Binomial], denom: &[Binomial], order: &[usize]) -> Result<Self> {
        let mut pos = vec![usize::MAX; nvars];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        let normalize = |b: &Binomial| -> Normalized {
            assert!(b.x != b.y && b.x < nvars && b.y < nvars, "binomial must separate two variables");
            if pos[b.x] < pos[b.y] {
                (Qq::one(), b.x, b.y, b.x, b.c.clone())
            } else {
                (b.c.neg(), b.y, b.x, b.y, b.c.inv().expect("nonzero constant"))
            }
        };
        let mut scalar = Qq::one();
        let mut monomial = vec![0i32; nvars];
        let mut leftover = Vec::new();
        let mut nums: Vec<Option<Normalized>> = Vec::new();
        for b in numer {
            if b.c.is_zero() {
                leftover.push(b.clone());
            } else {
                nums.push(Some(normalize(b)));
            }
        }
        let mut series = Vec::new();
        for b in denom {
            if b.c.is_zero() {
                return Err(Error::ZeroConstantDivisor);
            }
            let (pre, var, s, l, kappa) = normalize(b);
            scalar = scalar.div(&pre)?;
            monomial[var] -= 1;
            let partner = nums.iter_mut().find(|slot| matches!(slot, Some((_, _, s2, l2, _)) if *s2 == s && *l2 == l));
            let kappa_num = match partner {
                Some(slot) => {
                    let (npre, nvar, _, _, nk) = slot.take().expect("matched slot is occupied");
                    scalar = scalar.mul(&npre);
                    monomial[nvar] += 1;
                    Some(nk)
                }
                None => None,
            };
            if kappa_num.as_ref() == Some(&kappa) {
                continue;
            }
            series.push(SeriesSpec { lo: pos[l], hi: pos[s], kappa, kappa_num });
        }
        for (slot, b) in nums.into_iter().zip(numer.iter().filter(|b| !b.c.is_zero())) {
            if slot.is_some() {
                leftover.push(b.clone());
            }
        }
        Ok(FactorPlan { nvars, order: order.to_vec(), scalar, monomial, leftover_numerators: leftover, series })
    }

    /// Exponents `beta` of a degree-zero monomial in the ratio coordinates.
    fn beta(&self, alpha: &[i32]) -> Vec<i64> {
        let n = self.nvars;
        let mut out = vec![0i64; n.saturating_sub(1)];
        let mut suffix = 0i64;
        for k in (0..n.saturating_sub(1)).rev() {
            suffix += alpha[self.order[k + 1]] as i64;
            out[k] = suffix;
        }
        out
    }
}

struct Series<C> {
    lo: usize,
    hi: usize,
    kappa: C,
    kappa_num: Option<C>,
    weights: Vec<C>,
}

impl<C: Coeff> Series<C> {
    fn weight(&mut self, k: usize) -> &C {
        while self.weights.len() <= k {
            let next = match self.weights.len() {
                0 => C::one(),
                1 => match &self.kappa_num {
                    None => self.kappa.clone(),
                    Some(kn) => self.kappa.sub(kn),
                },
                _ => self.weights.last().unwrap().mul(&self.kappa),
            };
            self.weights.push(next);
        }
        &self.weights[k]
    }
}

#[derive(PartialEq, Eq, Hash)]
enum MemoKey {
    Packed(u128),
    Wide(u32, u32, Vec<u32>),
}

/// Coefficient extraction `[x^gamma] prod_p S_p`, memoized on (factor, residual exponent).
struct Kernel<C> {
    dim: usize,
    series: Vec<Series<C>>,
    /// Coordinates touched by factors `p..`, per `p`.
    coverage: Vec<Vec<bool>>,
    memo: HashMap<MemoKey, C>,
}

impl<C: Coeff> Kernel<C> {
    fn new(plan: &FactorPlan) -> Option<Self> {
        let dim = plan.nvars.saturating_sub(1);
        let mut series = Vec::with_capacity(plan.series.len());
        for s in &plan.series {
            series.push(Series {
                lo: s.lo,
                hi: s.hi,
                kappa: C::from_qq(&s.kappa)?,
                kappa_num: match &s.kappa_num {
                    Some(k) => Some(C::from_qq(k)?),
                    None => None,
                },
                weights: Vec::new(),
            });
        }
        let mut coverage = vec![vec![false; dim]; series.len() + 1];
        for p in (0..series.len()).rev() {
            coverage[p] = coverage[p + 1].clone();
            for k in series[p].lo..series[p].hi {
                coverage[p][k] = true;
            }
        }
        Some(Kernel { dim, series, coverage, memo: HashMap::new() })
    }

    fn key(&self, cap: u32, p: usize, nu: &[u32]) -> MemoKey {
        if self.dim <= 9 && p < 256 && cap < 4096 && nu.iter().all(|&x| x < 4096) {
            let mut k: u128 = (cap as u128) << 116 | (p as u128) << 108;
            for (j, &x) in nu.iter().enumerate() {
                k |= (x as u128) << (12 * j);
            }
            MemoKey::Packed(k)
        } else {
            MemoKey::Wide(cap, p as u32, nu.to_vec())
        }
    }

    fn coefficient(&mut self, gamma: &[u32], cap: u32) -> C {
        let mut nu = gamma.to_vec();
        self.g(0, &mut nu, cap)
    }

    fn g(&mut self, p: usize, nu: &mut [u32], cap: u32) -> C {
        if nu.iter().zip(&self.coverage[p]).any(|(&x, &cov)| x > 0 && !cov) {
            return C::zero();
        }
        if p == self.series.len() {
            return C::one();
        }
        let key = self.key(cap, p, nu);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let (lo, hi) = (self.series[p].lo, self.series[p].hi);
        let natural = nu[lo..hi].iter().copied().min().unwrap_or(0);
        let kmax = natural.min(cap);
        let mut acc = C::zero();
        for k in 0..=kmax {
            if k > 0 {
                for x in &mut nu[lo..hi] {
                    *x -= 1;
                }
            }
            let sub = self.g(p + 1, nu, cap);
            if !sub.is_zero() {
                let w = self.series[p].weight(k as usize).clone();
                acc = acc.add(&w.mul(&sub));
            }
        }
        for x in &mut nu[lo..hi] {
            *x += kmax;
        }
        self.memo.insert(key, acc.clone());
        acc
    }
}

/// Cap from the exponent spread: the largest ratio exponent any query needs.
fn spread_cap(gammas: impl Iterator<Item = u32>, offset: i64) -> u32 {
    (gammas.max().unwrap_or(0) as i64 + offset).max(0) as u32
}

fn to_gamma(beta: &[i64]) -> Option<Vec<u32>> {
    beta.iter().map(|&b| if b <= 0 { Some((-b) as u32) } else { None }).collect()
}

fn mul_binomial_map(f: &BTreeMap<Vec<i32>, Qq>, b: &Binomial) -> BTreeMap<Vec<i32>, Qq> {
    let mut out: BTreeMap<Vec<i32>, Qq> = BTreeMap::new();
    let mut put = |e: Vec<i32>, c: Qq| {
        let slot = out.entry(e).or_insert_with(Qq::zero);
        *slot = slot.add(&c);
    };
    for (e, c) in f {
        let mut ex = e.clone();
        ex[b.x] += 1;
        put(ex, c.clone());
        let mut ey = e.clone();
        ey[b.y] += 1;
        put(ey, c.mul(&b.c).neg());
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn constant_term_with<C: Coeff>(plan: &FactorPlan, numerator: &BTreeMap<Vec<i32>, Qq>, opts: CtOptions) -> Option<Result<Qq>> {
    let mut kernel = Kernel::<C>::new(plan)?;
    let mut terms: Vec<(Vec<u32>, C)> = Vec::new();
    for (e, c) in numerator {
        let alpha: Vec<i32> = e.iter().zip(&plan.monomial).map(|(a, b)| a + b).collect();
        if alpha.iter().map(|&x| x as i64).sum::<i64>() != 0 {
            continue;
        }
        if let Some(gamma) = to_gamma(&plan.beta(&alpha)) {
            terms.push((gamma, C::from_qq(c)?));
        }
    }
    let cap = spread_cap(terms.iter().flat_map(|(g, _)| g.iter().copied()), opts.cap_offset);
    let mut eval = |cap: u32| {
        let mut acc = C::zero();
        for (gamma, c) in &terms {
            acc = acc.add(&c.mul(&kernel.coefficient(gamma, cap)));
        }
        acc
    };
    let value = eval(cap);
    if opts.certify {
        let check = eval(cap + 1);
        if check != value {
            return Some(Err(Error::CapInstability(value.to_qq().to_string(), check.to_qq().to_string())));
        }
    }
    Some(Ok(value.to_qq().mul(&plan.scalar)))
}

/// Constant term of the integrand: coefficient of `z^0` after expanding every
/// binomial in the ratio of its smaller to its larger variable.
pub fn constant_term(ri: &RegimeIntegrand) -> Result<Qq> {
    constant_term_opts(ri, CtOptions::default())
}

pub fn constant_term_opts(ri: &RegimeIntegrand, opts: CtOptions) -> Result<Qq> {
    let plan = FactorPlan::new(ri.nvars, &ri.numer_factors, &ri.denom_factors, &ri.order)?;
    let mut numerator = ri.numerator.clone();
    for b in &plan.leftover_numerators {
        numerator = mul_binomial_map(&numerator, b);
    }
    let value = match constant_term_with::<QLaurent>(&plan, &numerator, opts) {
        Some(v) => v?,
        None => constant_term_with::<Qq>(&plan, &numerator, opts).expect("Q(q) embeds every scalar")?,
    };
    Ok(value.mul(&ri.scalar))
}

/// Position `a` of an ordering maps to the `•_a`-th variable of color `i_a`.
fn position_map(n: &DegreeVector, colors: &[usize]) -> Vec<usize> {
    let mut offs = vec![0usize; n.rank() + 1];
    for i in 0..n.rank() {
        offs[i + 1] = offs[i] + n[i] as usize;
    }
    let mut seen = vec![0usize; n.rank()];
    colors
        .iter()
        .map(|&i| {
            let v = offs[i] + seen[i];
            seen[i] += 1;
            v
        })
        .collect()
}

/// Integrand factors for an ordering: `(z_b - z_a)` over same-color pairs and
/// `(z_b - q^{-d_{i_b i_a}} z_a)` over all pairs `a < b`, with the sign left by
/// cancelling cross-color differences against the standard denominator.
fn ordering_factors(c: &CartanData, colors: &[usize]) -> (i64, Vec<Binomial>, Vec<Binomial>) {
    let n = colors.len();
    let mut sign = 1i64;
    let mut numer = Vec::new();
    let mut denom = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (ia, ib) = (colors[a], colors[b]);
            if ia == ib {
                numer.push(Binomial { x: b, y: a, c: Qq::one() });
            } else if ia < ib {
                sign = -sign;
            }
            denom.push(Binomial { x: b, y: a, c: Qq::q_pow(-c.d(ib, ia)) });
        }
    }
    (sign, numer, denom)
}

/// The integrand of `<e-word, F>` (descending regime) or of `<e-word, S(F)>`
/// (ascending regime, with the sign `(-1)^n`).
pub fn pairing_integrand(c: &CartanData, w: &Word, f: &ShuffleElement, regime: Regime) -> RegimeIntegrand {
    let colors = w.colors();
    let n = colors.len();
    let map = position_map(f.hdeg(), &colors);
    let (sign, numer, denom) = ordering_factors(c, &colors);
    let degs = w.degrees();
    let mut numerator = BTreeMap::new();
    for (e, coef) in f.numerator().terms() {
        let alpha: Vec<i32> = (0..n).map(|a| e[map[a]] + degs[a] as i32).collect();
        numerator.insert(alpha, coef.clone());
    }
    let twist = regime.twist(n);
    RegimeIntegrand { nvars: n, numerator, numer_factors: numer, denom_factors: denom, order: regime.magnitude_order(n), scalar: Qq::from_int(sign * twist) }
}

fn check_pairable(c: &CartanData, w: &Word, f: &ShuffleElement) -> Result<bool> {
    if w.sign != Sign::Plus || f.sign() != Sign::Minus {
        return Err(Error::MixedSigns);
    }
    c.check_rank(f.hdeg())?;
    if &w.hdeg(c.rank()) != f.hdeg() {
        return Ok(false);
    }
    if f.is_zero() {
        return Ok(false);
    }
    Ok(w.vdeg() + f.vdeg()? == 0)
}

/// `<e_{i_1,d_1} * ... * e_{i_n,d_n}, F>`.
pub fn pair_word(c: &CartanData, w: &Word, f: &ShuffleElement) -> Result<Qq> {
    pair_word_opts(c, w, f, Regime::Descending, CtOptions::default())
}

/// `<e_{i_1,d_1} * ... * e_{i_n,d_n}, S(F)>`, without constructing `S`.
pub fn pair_word_antipode(c: &CartanData, w: &Word, f: &ShuffleElement) -> Result<Qq> {
    pair_word_opts(c, w, f, Regime::Ascending, CtOptions::default())
}

pub fn pair_word_opts(c: &CartanData, w: &Word, f: &ShuffleElement, regime: Regime, opts: CtOptions) -> Result<Qq> {
    if !check_pairable(c, w, f)? {
        return Ok(Qq::zero());
    }
    constant_term_opts(&pairing_integrand(c, w, f, regime), opts)
}

/// Per-ordering kernel shared by every entry of a Gram matrix.
struct OrderingKernel<C> {
    plan: FactorPlan,
    kernel: Kernel<C>,
    scalar: C,
    map: Vec<usize>,
    /// Per column: (beta, total degree, coefficient) of each numerator term.
    columns: Vec<Vec<(Vec<i64>, i64, C)>>,
}

impl<C: Coeff> OrderingKernel<C> {
    fn new(c: &CartanData, n: &DegreeVector, colors: &[usize], regime: Regime, columns: &[ShuffleElement]) -> Option<Self> {
        let (sign, numer, denom) = ordering_factors(c, colors);
        let order = regime.magnitude_order(colors.len());
        let plan = FactorPlan::new(colors.len(), &numer, &denom, &order).expect("pairing factors have nonzero constants");
        debug_assert!(plan.leftover_numerators.is_empty());
        let kernel = Kernel::new(&plan)?;
        let twist = regime.twist(colors.len());
        let scalar = C::from_qq(&plan.scalar.mul(&Qq::from_int(sign * twist)))?;
        let map = position_map(n, colors);
        let mut cols = Vec::with_capacity(columns.len());
        for f in columns {
            let mut terms = Vec::with_capacity(f.numerator().len());
            for (e, coef) in f.numerator().terms() {
                let alpha: Vec<i32> = (0..colors.len()).map(|a| e[map[a]] + plan.monomial[a]).collect();
                let deg: i64 = alpha.iter().map(|&x| x as i64).sum();
                terms.push((plan.beta(&alpha), deg, C::from_qq(coef)?));
            }
            cols.push(terms);
        }
        Some(OrderingKernel { plan, kernel, scalar, map, columns: cols })
    }

    fn gammas<'a>(&'a self, row_beta: &'a [i64], row_deg: i64) -> impl Iterator<Item = u32> + 'a {
        self.columns.iter().flatten().filter(move |(_, deg, _)| deg + row_deg == 0).flat_map(move |(beta, _, _)| {
            beta.iter().zip(row_beta).map(|(a, b)| (-(a + b)).max(0) as u32).collect::<Vec<_>>()
        })
    }

    fn entry(&mut self, col: usize, row_beta: &[i64], row_deg: i64, cap: u32) -> C {
        let mut acc = C::zero();
        let mut gamma = vec![0u32; row_beta.len()];
        for t in 0..self.columns[col].len() {
            let (beta, deg, _) = &self.columns[col][t];
            if deg + row_deg != 0 {
                continue;
            }
            let mut ok = true;
            for (k, g) in gamma.iter_mut().enumerate() {
                let b = beta[k] + row_beta[k];
                if b > 0 {
                    ok = false;
                    break;
                }
                *g = (-b) as u32;
            }
            if !ok {
                continue;
            }
            let value = self.kernel.coefficient(&gamma, cap);
            if !value.is_zero() {
                acc = acc.add(&self.columns[col][t].2.mul(&value));
            }
        }
        acc.mul(&self.scalar)
    }
}

/// How many test-family rows to evaluate.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowPolicy {
    /// Every admissible word.
    All,
    /// Stop once a modular echelon certifies full column rank; sound because
    /// specialization can only lower the rank.
    UntilFullRank,
}

/// Which Gram family a matrix belongs to.
#[derive(Clone, PartialEq, Debug, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GramFamily {
    Lr { r: DegreeVector },
    Key { p1: SlopeVector, p2: SlopeVector },
}

#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub family: GramFamily,
    pub n: DegreeVector,
    pub d: i64,
    pub rows: Vec<Word>,
    pub columns: SubspaceBasis,
    pub entries: QqMatrix,
    /// Admissible words before any early stop.
    pub family_size: usize,
    pub cap: u32,
}

impl GramMatrix {
    pub fn to_json(&self, c: &CartanData) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "n": self.n,
            "d": self.d,
            "family_size": self.family_size,
            "cap": self.cap,
            "rows": self.rows.iter().map(|w| w.to_literal(c)).collect::<Vec<_>>(),
            "cols": self.columns.orbits,
            "entries": self.entries.rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Row echelon form over `F_p` at one point, grown one row at a time.
struct ModEchelon {
    at: ModEval,
    pivots: Vec<(usize, Vec<u64>)>,
}

impl ModEchelon {
    fn push(&mut self, row: &[Qq]) -> bool {
        let p = self.at.prime();
        let Ok(mut v) = row.iter().map(|x| self.at.specialize(x)).collect::<std::result::Result<Vec<u64>, _>>() else {
            return false;
        };
        for (col, prow) in &self.pivots {
            if v[*col] != 0 {
                let f = v[*col];
                for (a, b) in v.iter_mut().zip(prow) {
                    *a = sub_mod(*a, mul_mod(f, *b, p), p);
                }
            }
        }
        let Some(col) = v.iter().position(|&x| x != 0) else { return false };
        let inv = inv_mod(v[col], p);
        for a in v.iter_mut() {
            *a = mul_mod(*a, inv, p);
        }
        self.pivots.push((col, v));
        true
    }
}

fn gram_from_family(
    c: &CartanData,
    family: GramFamily,
    (n, d): (&DegreeVector, i64),
    columns: SubspaceBasis,
    words: Vec<Word>,
    policy: RowPolicy,
    opts: CtOptions,
) -> Result<GramMatrix> {
    let elements = columns.elements();
    let ncols = elements.len();
    let family_size = words.len();
    let mut entries = QqMatrix::new(ncols);
    if ncols == 0 || words.is_empty() {
        return Ok(GramMatrix { family, n: n.clone(), d, rows: Vec::new(), columns, entries, family_size, cap: 0 });
    }
    let value = match gram_rows::<QLaurent>(c, n, &elements, &words, policy, opts) {
        Some(v) => v?,
        None => gram_rows::<Qq>(c, n, &elements, &words, policy, opts).expect("Q(q) embeds every scalar")?,
    };
    let (kept, cap) = value;
    let mut rows = Vec::with_capacity(kept.len());
    for (w, row) in kept {
        entries.push_row(w.to_literal(c), row)?;
        rows.push(w);
    }
    Ok(GramMatrix { family, n: n.clone(), d, rows, columns, entries, family_size, cap })
}

type GramRows = (Vec<(Word, Vec<Qq>)>, u32);

fn gram_rows<C: Coeff>(
    c: &CartanData,
    n: &DegreeVector,
    elements: &[ShuffleElement],
    words: &[Word],
    policy: RowPolicy,
    opts: CtOptions,
) -> Option<Result<GramRows>> {
    let ncols = elements.len();
    let mut kernels: BTreeMap<Vec<usize>, OrderingKernel<C>> = BTreeMap::new();
    for w in words {
        let colors = w.colors();
        if !kernels.contains_key(&colors) {
            kernels.insert(colors.clone(), OrderingKernel::new(c, n, &colors, Regime::Ascending, elements)?);
        }
    }
    // Row data: beta of the letter monomial and its degree.
    let row_data: Vec<(Vec<i64>, i64)> = words
        .iter()
        .map(|w| {
            let k = &kernels[&w.colors()];
            let degs: Vec<i32> = w.degrees().iter().map(|&x| x as i32).collect();
            (k.plan.beta(&degs), w.vdeg())
        })
        .collect();
    let cap = spread_cap(
        words.iter().zip(&row_data).flat_map(|(w, (beta, deg))| kernels[&w.colors()].gammas(beta, *deg).collect::<Vec<_>>()),
        opts.cap_offset,
    );
    let mut echelon = match policy {
        RowPolicy::All => None,
        RowPolicy::UntilFullRank => match ModularPolicy::default().points() {
            Ok(points) => Some(ModEchelon { at: points[0], pivots: Vec::new() }),
            Err(e) => return Some(Err(Error::Scalar(e))),
        },
    };
    let mut kept = Vec::new();
    for (w, (beta, deg)) in words.iter().zip(&row_data) {
        let k = kernels.get_mut(&w.colors()).expect("kernel built for every ordering");
        let _ = &k.map;
        let mut row = Vec::with_capacity(ncols);
        for col in 0..ncols {
            let v = k.entry(col, beta, *deg, cap);
            if opts.certify {
                let check = k.entry(col, beta, *deg, cap + 1);
                if check != v {
                    return Some(Err(Error::CapInstability(v.to_qq().to_string(), check.to_qq().to_string())));
                }
            }
            row.push(v.to_qq());
        }
        if row.iter().all(|x| x.is_zero()) {
            continue;
        }
        let full = match echelon.as_mut() {
            Some(ech) => {
                ech.push(&row);
                ech.pivots.len() == ncols
            }
            None => false,
        };
        kept.push((w.clone(), row));
        if full {
            break;
        }
    }
    Some(Ok((kept, cap)))
}

/// Gram matrix of `<E prod z^{-r}, S(F)>` for `F` in `S_{<0|-n,d}`: rows are the
/// words with letters `d_a >= -r_{i_a}` and `sum d_a = -d`.
pub fn gram_for_lr(c: &CartanData, r: &DegreeVector, n: &DegreeVector, d: i64, policy: RowPolicy, opts: CtOptions) -> Result<GramMatrix> {
    c.require_finite_type()?;
    c.check_rank(r)?;
    let columns = basis_minus_strictneg(c, n, d)?;
    let floor: Vec<i64> = r.entries().iter().map(|&x| -x).collect();
    let words = if columns.dim == 0 { Vec::new() } else { words_with_floor(Sign::Plus, n, -d, &floor) };
    gram_from_family(c, GramFamily::Lr { r: r.clone() }, (n, d), columns, words, policy, opts)
}

/// Gram matrix of the antipode-twisted pairing between words with letters
/// `>= 0` summing to `d` and the band `S^-_{>p1} ∩ S^-_{<p2}` at `(-n, -d)`.
pub fn gram_for_key(c: &CartanData, p1: &SlopeVector, p2: &SlopeVector, n: &DegreeVector, d: i64, policy: RowPolicy, opts: CtOptions) -> Result<GramMatrix> {
    c.require_finite_type()?;
    let columns = basis_minus_band(c, p1, p2, n, -d)?;
    let words = if columns.dim == 0 { Vec::new() } else { words_with_floor(Sign::Plus, n, d, &vec![0; c.rank()]) };
    gram_from_family(c, GramFamily::Key { p1: p1.clone(), p2: p2.clone() }, (n, d), columns, words, policy, opts)
}
