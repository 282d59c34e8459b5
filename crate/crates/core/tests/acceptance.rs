//! Acceptance gate: every criterion runs at its stated tolerance and prints one
//! PASS/FAIL line. Runs without the libtest harness so the lines always show.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::Instant;

use loopchar_core::cartan::{is_generic, CartanData, DegreeVector, Genericity, QSqrt2, SlopeVector};
use loopchar_core::characters::{
    b_dim_series, chi_product, dims_slope_geq0, lr_dim, verify_theorem, Mode, RunSettings, VerificationReport,
};
use loopchar_core::laurent::{LaurentPoly, MonomialOrbit};
use loopchar_core::linalg::{rank_exact, rank_modular, ModularPolicy};
use loopchar_core::pairing::{
    constant_term, constant_term_opts, gram_for_lr, pair_word, pair_word_antipode, pairing_integrand, CtOptions, Regime,
    RowPolicy,
};
use loopchar_core::scalars::Qq;
use loopchar_core::shuffle::{shift, word_to_element, ShuffleElement, Sign, Word};
use loopchar_core::slopes::{slope_test, SlopeKind};
use loopchar_core::Error;
use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dv(v: &[i64]) -> DegreeVector {
    DegreeVector::new(v.to_vec())
}

fn cat(name: &str) -> CartanData {
    CartanData::catalog(name).expect("catalog type")
}

/// Outcome of one criterion: failures are collected as human-readable reasons.
struct Outcome {
    failures: Vec<String>,
    facts: Vec<String>,
    cap_errors: usize,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), facts: Vec::new(), cap_errors: 0 }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn error(&mut self, context: &str, e: Error) {
        if matches!(e, Error::CapInstability(_, _)) {
            self.cap_errors += 1;
        }
        self.failures.push(format!("{context}: {e}"));
    }

    fn report(&mut self, context: &str, r: Result<VerificationReport, Error>) -> Option<VerificationReport> {
        match r {
            Ok(rep) => {
                for cell in rep.failures() {
                    self.failures.push(format!("{context}: cell n={} d={} computed {} formula {}", cell.n, cell.d, cell.computed, cell.formula));
                }
                Some(rep)
            }
            Err(e) => {
                self.error(context, e);
                None
            }
        }
    }
}

fn print_line(index: usize, title: &str, tolerance: &str, started: Instant, out: &Outcome) -> bool {
    let pass = out.failures.is_empty();
    let status = if pass { "PASS" } else { "FAIL" };
    let facts = if out.facts.is_empty() { String::new() } else { format!("; {}", out.facts.join("; ")) };
    println!("criterion {index}: {status} | {title} | tolerance: {tolerance} | {:.1}s{facts}", started.elapsed().as_secs_f64());
    for f in out.failures.iter().take(10) {
        println!("    {f}");
    }
    if out.failures.len() > 10 {
        println!("    ... {} more", out.failures.len() - 10);
    }
    pass
}

/// Gram matrices behind a report, ranked both ways; returns (cells compared, disagreements).
fn modular_vs_exact(c: &CartanData, r: &DegreeVector, cells: &[(DegreeVector, i64)], out: &mut Outcome) -> usize {
    let policy = ModularPolicy::default();
    let mut compared = 0;
    for (n, d) in cells {
        if n.is_zero() || *d <= 0 || *d > r.dot(n) {
            continue;
        }
        match gram_for_lr(c, r, n, *d, RowPolicy::All, CtOptions::default()) {
            Ok(g) => {
                let exact = rank_exact(&g.entries);
                match rank_modular(&g.entries, &policy) {
                    Ok(m) => out.check(m.rank == exact && !m.unstable, || format!("{c} r={r} n={n} d={d}: modular {} vs exact {exact}", m.rank)),
                    Err(e) => out.failures.push(format!("{c} r={r} n={n} d={d}: {e}")),
                }
                compared += 1;
            }
            Err(e) => out.error(&format!("{c} r={r} n={n} d={d}"), e),
        }
    }
    compared
}

fn criterion_1(cap_errors: &mut usize) -> bool {
    let t = Instant::now();
    let mut out = Outcome::new();
    let c = cat("A1");
    let settings = RunSettings::with_mode(Mode::Exact);
    let mut cells = 0;
    for r in -1..=3 {
        let rep = out.report(&format!("A1 r={r}"), verify_theorem(&c, &dv(&[r]), &dv(&[6]), 8, &settings));
        cells += rep.map_or(0, |rep| rep.cells.len());
    }
    out.facts.push(format!("{cells} cells"));
    *cap_errors += out.cap_errors;
    print_line(1, "A1 refined character = product formula, r in {-1,0,1,2,3}, n<=6, d<=8", "exact integer equality", t, &out)
}

fn criterion_2(cap_errors: &mut usize, sampled: &mut Vec<(String, DegreeVector, DegreeVector, i64)>) -> bool {
    let t = Instant::now();
    let mut out = Outcome::new();
    let c = cat("A2");
    let mut settings = RunSettings::with_mode(Mode::Modular);
    settings.policy.seed = 7;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut all_cells = Vec::new();
    for r in [[1, 1], [1, 0], [2, 1], [0, -1]] {
        let r = dv(&r);
        if let Some(rep) = out.report(&format!("A2 r={r}"), verify_theorem(&c, &r, &dv(&[2, 2]), 5, &settings)) {
            for cell in &rep.cells {
                if cell.d >= 1 && cell.d <= r.dot(&cell.n) {
                    all_cells.push((r.clone(), cell.n.clone(), cell.d, cell.computed));
                }
            }
            if r == dv(&[1, 1]) {
                let k = rep.cells.iter().find(|x| x.n == dv(&[1, 1]) && x.d == 2).map(|x| x.computed);
                out.check(k == Some(2), || format!("cell ((1,1),2) = {k:?}, expected 2"));
            }
        }
    }
    // Exact confirmation of random nontrivial cells.
    let exact = RunSettings::with_mode(Mode::Exact);
    let picks: Vec<_> = all_cells.choose_multiple(&mut rng, 5).cloned().collect();
    for (r, n, d, modular) in &picks {
        match lr_dim(&c, r, n, *d, &exact) {
            Ok(o) => out.check(o.rank as u64 == *modular, || format!("r={r} n={n} d={d}: exact {} vs modular {modular}", o.rank)),
            Err(e) => out.error(&format!("r={r} n={n} d={d}"), e),
        }
    }
    for (r, n, d, _) in all_cells.choose_multiple(&mut rng, 20) {
        sampled.push(("A2".into(), r.clone(), n.clone(), *d));
    }
    out.facts.push(format!("{} nontrivial cells, {} exact confirmations", all_cells.len(), picks.len()));
    *cap_errors += out.cap_errors;
    print_line(2, "A2 refined character = product formula, 4 shifts, n<=(2,2), d<=5, ((1,1),2)=2", "exact integer equality", t, &out)
}

fn criterion_3(cap_errors: &mut usize, sampled: &mut Vec<(String, DegreeVector, DegreeVector, i64)>) -> bool {
    let t = Instant::now();
    let mut out = Outcome::new();
    let c = cat("B2");
    let r = dv(&[1, 1]);
    let rep = out.report("B2 r=(1,1)", verify_theorem(&c, &r, &dv(&[2, 2]), 4, &RunSettings::with_mode(Mode::Exact)));
    if let Some(rep) = rep {
        let nontrivial: Vec<_> = rep.cells.iter().filter(|x| x.d >= 1 && x.d <= r.dot(&x.n)).collect();
        out.facts.push(format!("{} cells ({} nontrivial)", rep.cells.len(), nontrivial.len()));
        for cell in nontrivial {
            sampled.push(("B2".into(), r.clone(), cell.n.clone(), cell.d));
        }
    }
    *cap_errors += out.cap_errors;
    print_line(3, "B2 refined character = product formula, r=(1,1), n<=(2,2), d<=4", "exact integer equality", t, &out)
}

fn partitions_at_most(d: i64, parts: i64) -> u64 {
    // p(d, <=k parts) = p(d - k, <=k parts) + p(d, <=k-1 parts)
    let mut table = vec![vec![0u64; (parts + 1) as usize]; (d + 1) as usize];
    for k in 0..=parts as usize {
        table[0][k] = 1;
    }
    for x in 1..=d as usize {
        for k in 1..=parts as usize {
            table[x][k] = table[x][k - 1] + if x >= k { table[x - k][k] } else { 0 };
        }
    }
    table[d as usize][parts as usize]
}

fn criterion_4() -> bool {
    let t = Instant::now();
    let mut out = Outcome::new();
    let settings = RunSettings::default();
    if let Some(rep) = out.report("A1", dims_slope_geq0(&cat("A1"), &dv(&[5]), 8, &settings)) {
        for cell in &rep.cells {
            let p = partitions_at_most(cell.d, cell.n[0]);
            out.check(cell.computed == p, || format!("A1 n={} d={}: {} vs {p} partitions", cell.n, cell.d, cell.computed));
        }
        out.facts.push(format!("A1 {} cells", rep.cells.len()));
    }
    if let Some(rep) = out.report("A2", dims_slope_geq0(&cat("A2"), &dv(&[2, 2]), 5, &settings)) {
        out.facts.push(format!("A2 {} cells", rep.cells.len()));
    }
    print_line(4, "dim S_{>=0|n,d} = dimension product, A1 n<=5 d<=8 (partition counts), A2 n<=(2,2) d<=5", "exact integer equality", t, &out)
}

fn criterion_5() -> bool {
    let t = Instant::now();
    let mut out = Outcome::new();
    let settings = RunSettings::default();
    let a1 = cat("A1");
    if let Some(rep) = out.report("A1 p=1", b_dim_series(&a1, &SlopeVector::from_integers(&[1]), &dv(&[4]), &settings)) {
        out.check(rep.cells.len() == 4 && rep.cells.iter().all(|x| x.computed == 1), || "A1 p=1: expected dimension 1 at n=1..4".into());
    }
    if let Some(rep) = out.report("A1 p=1/2", b_dim_series(&a1, &SlopeVector::from_rationals(&[(1, 2)]), &dv(&[4]), &settings)) {
        let got: Vec<(i64, u64)> = rep.cells.iter().map(|x| (x.n[0], x.computed)).collect();
        out.check(got == vec![(2, 0), (4, 0)], || format!("A1 p=1/2: {got:?}"));
    }
    let a2 = cat("A2");
    let one = Rational64::from_integer(1);
    let p = SlopeVector::Finite(vec![QSqrt2::new(one, one), QSqrt2::new(one, -one)]);
    let bound = dv(&[3, 3]);
    match is_generic(&p, &bound) {
        Genericity::Generic { generator, .. } => out.check(generator == Some(dv(&[1, 1])), || format!("generator {generator:?}")),
        other => out.failures.push(format!("p not generic: {other:?}")),
    }
    if let Some(rep) = out.report("A2 p=(1+sqrt2,1-sqrt2)", b_dim_series(&a2, &p, &bound, &settings)) {
        let along: Vec<String> = rep.cells.iter().map(|x| format!("{}:{}", x.n, x.computed)).collect();
        out.check(rep.cells.iter().all(|x| x.n[0] == x.n[1]), || "integral cells off the generator".into());
        out.facts.push(format!("A2 along (1,1): {}", along.join(" ")));
    }
    print_line(5, "slope subalgebra dims: A1 p=1 and p=1/2, A2 generic quadratic p along (1,1)", "exact integer equality", t, &out)
}

fn random_minus_word(rng: &mut ChaCha8Rng, rank: usize, len: usize) -> Vec<(usize, i64)> {
    (0..len).map(|_| (rng.gen_range(0..rank), rng.gen_range(-2..=2))).collect()
}

/// An e-word with the same colors and opposite total degree, letters scrambled.
fn matching_plus_word(rng: &mut ChaCha8Rng, f: &[(usize, i64)]) -> Vec<(usize, i64)> {
    let mut letters: Vec<(usize, i64)> = f.iter().map(|&(i, d)| (i, -d)).collect();
    letters.shuffle(rng);
    if letters.len() >= 2 {
        let t = rng.gen_range(-1..=1);
        letters[0].1 += t;
        letters[1].1 -= t;
    }
    letters
}

fn criterion_6(cap_errors: &mut usize) -> bool {
    let t = Instant::now();
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut nonzero = 0;
    for name in ["A1", "A2", "B2"] {
        let c = cat(name);
        let rank = c.rank();
        // Single letters: delta law and the antipode sign.
        for i in 0..rank {
            for d in -3..=3 {
                for e in -3..=3 {
                    let w = Word::plus(&[(i, d)]);
                    let f = word_to_element(&c, &Word::minus(&[(i, e)])).unwrap();
                    let delta = Qq::from_int(i64::from(d + e == 0));
                    match (pair_word(&c, &w, &f), pair_word_antipode(&c, &w, &f)) {
                        (Ok(a), Ok(b)) => out.check(a == delta && b == delta.neg(), || format!("{name} <e[{i},{d}], f[{i},{e}]> = {a}, antipode {b}")),
                        (Err(err), _) | (_, Err(err)) => out.error(name, err),
                    }
                }
            }
        }
        // Shift invariance on random pairs with matching degrees.
        for _ in 0..100 {
            let len = rng.gen_range(1..=3);
            let fw = random_minus_word(&mut rng, rank, len);
            let ew = matching_plus_word(&mut rng, &fw);
            let r = DegreeVector::new((0..rank).map(|_| rng.gen_range(-2..=2)).collect());
            let f = word_to_element(&c, &Word::minus(&fw)).unwrap();
            let e = Word::plus(&ew);
            let res = (|| -> Result<(), Error> {
                let a = pair_word(&c, &e, &f)?;
                let b = pair_word(&c, &e.shifted(&r), &shift(&f, &r))?;
                let a2 = pair_word_antipode(&c, &e, &f)?;
                let b2 = pair_word_antipode(&c, &e.shifted(&r), &shift(&f, &r))?;
                if !a.is_zero() {
                    nonzero += 1;
                }
                out.check(a == b && a2 == b2, || format!("{name} shift {r}: {a} vs {b}, antipode {a2} vs {b2}"));
                Ok(())
            })();
            if let Err(err) = res {
                out.error(name, err);
            }
        }
        // Degree orthogonality, including direct evaluation of the integrand.
        for _ in 0..30 {
            let len = rng.gen_range(1..=3);
            let fw = random_minus_word(&mut rng, rank, len);
            let mut ew = matching_plus_word(&mut rng, &fw);
            ew[0].1 += rng.gen_range(1..=2);
            let f = word_to_element(&c, &Word::minus(&fw)).unwrap();
            let e = Word::plus(&ew);
            match constant_term(&pairing_integrand(&c, &e, &f, Regime::Descending)) {
                Ok(v) => out.check(v.is_zero(), || format!("{name} vdeg mismatch pairs to {v}")),
                Err(err) => out.error(name, err),
            }
            let mut longer = ew.clone();
            longer.push((0, 0));
            let v = pair_word(&c, &Word::plus(&longer), &f);
            out.check(v == Ok(Qq::zero()), || format!("{name} hdeg mismatch pairs to {v:?}"));
        }
    }
    let a1 = cat("A1");
    let f00 = word_to_element(&a1, &Word::minus(&[(0, 0), (0, 0)])).unwrap();
    let v = pair_word(&a1, &Word::plus(&[(0, 0), (0, 0)]), &f00);
    out.check(v == Ok("q^2+1".parse().unwrap()), || format!("<e0 e0, f0 f0> = {v:?}"));
    out.facts.push(format!("{nonzero} nonzero shift pairs"));
    *cap_errors += out.cap_errors;
    print_line(6, "pairing: delta law, antipode sign, shift invariance (100 pairs per type), orthogonality, <e0e0,f0f0>=q^2+1", "exact equality in Q(q)", t, &out)
}

/// Relation between the scaled order and `±p·m` for each sign and kind.
fn oracle_condition(sign: Sign, kind: SlopeKind) -> (bool, Ordering, bool, bool) {
    // (xi -> 0?, relation of order to threshold, strict?, threshold negated?)
    match (sign, kind) {
        (Sign::Plus, SlopeKind::Geq) => (true, Ordering::Greater, false, false),
        (Sign::Plus, SlopeKind::Gt) => (true, Ordering::Greater, true, false),
        (Sign::Plus, SlopeKind::Leq) => (false, Ordering::Less, false, false),
        (Sign::Plus, SlopeKind::Lt) => (false, Ordering::Less, true, false),
        (Sign::Minus, SlopeKind::Leq) => (true, Ordering::Greater, false, true),
        (Sign::Minus, SlopeKind::Lt) => (true, Ordering::Greater, true, true),
        (Sign::Minus, SlopeKind::Geq) => (false, Ordering::Less, false, true),
        (Sign::Minus, SlopeKind::Gt) => (false, Ordering::Less, true, true),
    }
}

/// Order (xi -> 0) or degree (xi -> infinity) in `xi` of `R = rho / prod_{i<j}(z_ia - z_jb)`
/// after `z -> xi z` on the chosen slots, by literal expansion.
fn xi_order(e: &ShuffleElement, scaled: &[bool], at_zero: bool) -> i64 {
    let n = e.hdeg();
    let offs: Vec<usize> = (0..n.rank()).scan(0usize, |acc, i| {
        let o = *acc;
        *acc += n[i] as usize;
        Some(o)
    }).collect();
    let nv: usize = n.entries().iter().map(|&x| x as usize).sum();
    // Denominator as a map (xi exponent, z exponents) -> integer.
    let mut den: BTreeMap<(i64, Vec<i32>), i64> = BTreeMap::new();
    den.insert((0, vec![0; nv]), 1);
    for i in 0..n.rank() {
        for j in i + 1..n.rank() {
            for a in 0..n[i] as usize {
                for b in 0..n[j] as usize {
                    let (x, y) = (offs[i] + a, offs[j] + b);
                    let mut next = BTreeMap::new();
                    for ((s, z), c) in &den {
                        for (v, sgn) in [(x, 1), (y, -1)] {
                            let mut z2 = z.clone();
                            z2[v] += 1;
                            *next.entry((s + i64::from(scaled[v]), z2)).or_insert(0) += sgn * c;
                        }
                    }
                    next.retain(|_, c| *c != 0);
                    den = next;
                }
            }
        }
    }
    let num_orders = e.numerator().terms().map(|(ex, _)| ex.iter().zip(scaled).filter(|(_, &s)| s).map(|(&k, _)| k as i64).sum::<i64>());
    let den_orders = den.keys().map(|(s, _)| *s);
    if at_zero {
        num_orders.min().unwrap() - den_orders.min().unwrap()
    } else {
        num_orders.max().unwrap() - den_orders.max().unwrap()
    }
}

fn oracle_slope(e: &ShuffleElement, p: &SlopeVector, kind: SlopeKind, rng: &mut ChaCha8Rng) -> bool {
    if e.is_zero() {
        return true;
    }
    let n = e.hdeg().clone();
    let (at_zero, rel, strict, negate) = oracle_condition(e.sign(), kind);
    for m in n.patterns_below() {
        // A random subset of slots per color; symmetry makes the choice immaterial.
        let mut scaled = Vec::new();
        for i in 0..n.rank() {
            let mut slots: Vec<bool> = (0..n[i]).map(|a| a < m[i]).collect();
            slots.shuffle(rng);
            scaled.extend(slots);
        }
        let k = xi_order(e, &scaled, at_zero);
        let t = p.dot(&m);
        let t = if negate { t.neg() } else { t };
        // t.cmp_int(k) is the position of k relative to t.
        let pos = t.cmp_int(k);
        let ok = if strict { pos == rel } else { pos == rel || pos == Ordering::Equal };
        if !ok {
            return false;
        }
    }
    true
}

fn random_element(rng: &mut ChaCha8Rng, sign: Sign, n: &DegreeVector) -> ShuffleElement {
    let nv: i64 = n.total();
    let total = rng.gen_range(-2..=2 * nv + 2);
    let mut poly = LaurentPoly::zero(n);
    for _ in 0..rng.gen_range(1..=3) {
        // Random exponents with the fixed total.
        let mut ex: Vec<i32> = (0..nv).map(|_| rng.gen_range(-2..=4)).collect();
        let diff = total as i32 - ex.iter().sum::<i32>();
        ex[0] += diff;
        let orbit = MonomialOrbit::of_monomial(n, &ex);
        poly = poly.add(&orbit.orbit_sum().scale(&Qq::from_int(rng.gen_range(1..=3))));
    }
    ShuffleElement::new(sign, poly).expect("orbit sums are symmetric")
}

fn random_slope(rng: &mut ChaCha8Rng, rank: usize) -> SlopeVector {
    let coords = (0..rank)
        .map(|_| match rng.gen_range(0..3) {
            0 => QSqrt2::integer(rng.gen_range(-3..=3)),
            1 => QSqrt2::rational(Rational64::new(rng.gen_range(-7..=7), rng.gen_range(1..=3))),
            _ => QSqrt2::new(Rational64::new(rng.gen_range(-3..=3), 2), Rational64::new(rng.gen_range(-2..=2), 2)),
        })
        .collect();
    SlopeVector::Finite(coords)
}

fn criterion_7() -> bool {
    let t = Instant::now();
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut agreements = 0usize;
    let mut trues = 0usize;
    for (name, shapes) in [("A1", vec![dv(&[1]), dv(&[2]), dv(&[3])]), ("A2", vec![dv(&[1, 1]), dv(&[2, 1]), dv(&[1, 2]), dv(&[2, 2])]), ("B2", vec![dv(&[1, 1]), dv(&[2, 1]), dv(&[1, 2]), dv(&[2, 2])])] {
        let rank = cat(name).rank();
        for kind in SlopeKind::ALL {
            for k in 0..100 {
                let n = shapes[k % shapes.len()].clone();
                let sign = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
                let e = random_element(&mut rng, sign, &n);
                let p = random_slope(&mut rng, rank);
                let expected = oracle_slope(&e, &p, kind, &mut rng);
                match slope_test(&e, &p, kind) {
                    Ok(got) => {
                        out.check(got == expected, || format!("{name} {kind:?} p={p} n={n}: support {got}, substitution {expected}"));
                        agreements += usize::from(got == expected);
                        trues += usize::from(expected);
                    }
                    Err(err) => out.error(name, err),
                }
            }
        }
    }
    out.facts.push(format!("{agreements} agreements ({trues} true)"));
    print_line(7, "slope support test = literal xi-substitution, 100 random elements per type and kind", "exact agreement", t, &out)
}

fn criterion_8(sampled: &[(String, DegreeVector, DegreeVector, i64)]) -> bool {
    let t = Instant::now();
    let mut out = Outcome::new();
    let a1 = cat("A1");
    let cells: Vec<(DegreeVector, i64)> = dv(&[6]).box_below().into_iter().flat_map(|n| (0..=8).map(move |d| (n.clone(), d))).collect();
    let mut compared = 0;
    for r in -1..=3 {
        compared += modular_vs_exact(&a1, &dv(&[r]), &cells, &mut out);
    }
    out.facts.push(format!("A1 exhaustive: {compared} matrices"));
    for name in ["A2", "B2"] {
        let c = cat(name);
        let picked: Vec<_> = sampled.iter().filter(|s| s.0 == name).collect();
        let mut k = 0;
        for (_, r, n, d) in &picked {
            k += modular_vs_exact(&c, r, &[(n.clone(), *d)], &mut out);
        }
        if name == "B2" {
            // The criterion-3 window has fewer than 20 Gram matrices; all are covered
            // above, and cells of a second shift top the sample up.
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let extra = dv(&[2, 1]);
            let pool: Vec<(DegreeVector, i64)> = dv(&[2, 2])
                .patterns_below()
                .into_iter()
                .flat_map(|n| (1..=4).map(move |d| (n.clone(), d)))
                .filter(|(n, d)| *d <= extra.dot(n))
                .collect();
            let top_up: Vec<_> = pool.choose_multiple(&mut rng, 6).cloned().collect();
            k += modular_vs_exact(&c, &extra, &top_up, &mut out);
        }
        out.check(k >= 20, || format!("{name}: only {k} cells sampled"));
        out.facts.push(format!("{name}: {k} matrices"));
    }
    print_line(8, "modular rank = exact rank on Gram matrices (A1 exhaustive, >=20 cells for A2 and B2)", "exact equality", t, &out)
}

fn criterion_9(cap_errors: usize) -> bool {
    let t = Instant::now();
    let mut out = Outcome::new();
    out.check(cap_errors == 0, || format!("{cap_errors} evaluations changed when caps were raised by 1"));
    // The certificate must fire when the cap is deliberately one short.
    let a1 = cat("A1");
    let f = word_to_element(&a1, &Word::minus(&[(0, 2), (0, -2)])).unwrap();
    let w = Word::plus(&[(0, 0), (0, 0)]);
    let detected = matches!(
        loopchar_core::pairing::pair_word_opts(&a1, &w, &f, Regime::Descending, CtOptions { cap_offset: -1, certify: true }),
        Err(Error::CapInstability(_, _))
    );
    out.check(detected, || "under-truncated evaluation was not flagged".into());
    let ri = pairing_integrand(&a1, &w, &f, Regime::Descending);
    let stable = constant_term_opts(&ri, CtOptions { cap_offset: 1, certify: true }) == constant_term(&ri);
    out.check(stable, || "raising the cap changed a certified value".into());
    out.facts.push("all evaluations in criteria 1-6 certified at cap+1".into());
    print_line(9, "constant-term values invariant when truncation caps grow by 1", "exact equality", t, &out)
}

fn main() {
    let total = Instant::now();
    let mut cap_errors = 0;
    let mut sampled = Vec::new();
    let results = [
        criterion_1(&mut cap_errors),
        criterion_2(&mut cap_errors, &mut sampled),
        criterion_3(&mut cap_errors, &mut sampled),
        criterion_4(),
        criterion_5(),
        criterion_6(&mut cap_errors),
        criterion_7(),
        criterion_8(&sampled),
        criterion_9(cap_errors),
    ];
    // Sanity: product formula itself is nontrivial on the tested windows.
    let chi = chi_product(&cat("A2"), &dv(&[1, 1]), &dv(&[2, 2]), 5, true).expect("finite type");
    assert_eq!(chi.get(&dv(&[1, 1]), 2), 2);
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed in {:.1}s", results.len(), total.elapsed().as_secs_f64());
    if passed != results.len() {
        std::process::exit(1);
    }
}
