use loopchar_core::cartan::{CartanData, DegreeVector, SlopeVector};
use loopchar_core::characters::{chi_product, chi_refined, lr_dim, RunSettings};
use loopchar_core::linalg::rank_exact;
use loopchar_core::pairing::{gram_for_lr, CtOptions, RowPolicy};
use loopchar_core::shuffle::{wheel_check, Sign};
use loopchar_core::slopes::{
    basis_minus_band, basis_minus_strictneg, basis_plus_geq, slope_test, word_span_dim, SlopeKind,
};
use proptest::prelude::*;

fn dv(v: &[i64]) -> DegreeVector {
    DegreeVector::new(v.to_vec())
}

fn cat(name: &str) -> CartanData {
    CartanData::catalog(name).unwrap()
}

#[test]
fn basis_elements_satisfy_their_defining_conditions() {
    for name in ["A2", "B2"] {
        let c = cat(name);
        let zero = SlopeVector::zero(2);
        for n in dv(&[2, 2]).patterns_below() {
            for d in 1..4 {
                let neg = basis_minus_strictneg(&c, &n, d).unwrap();
                for e in neg.elements() {
                    assert_eq!(e.sign(), Sign::Minus);
                    assert!(slope_test(&e, &zero, SlopeKind::Lt).unwrap(), "{name} {n} {d}");
                    assert!(wheel_check(&c, &e).unwrap());
                }
                let geq = basis_plus_geq(&c, &zero, &n, d).unwrap();
                for e in geq.elements() {
                    assert!(slope_test(&e, &zero, SlopeKind::Geq).unwrap());
                    assert!(wheel_check(&c, &e).unwrap());
                }
                let band = basis_minus_band(&c, &SlopeVector::from_integers(&[-1, -1]), &SlopeVector::from_integers(&[1, 0]), &n, d).unwrap();
                for e in band.elements() {
                    assert!(slope_test(&e, &SlopeVector::from_integers(&[-1, -1]), SlopeKind::Gt).unwrap());
                    assert!(slope_test(&e, &SlopeVector::from_integers(&[1, 0]), SlopeKind::Lt).unwrap());
                }
            }
        }
    }
}

#[test]
fn basis_examples() {
    let a1 = cat("A1");
    let zero = SlopeVector::zero(1);
    assert_eq!(basis_minus_strictneg(&a1, &dv(&[2]), 2).unwrap().dim, 1);
    assert_eq!(basis_minus_strictneg(&a1, &dv(&[1]), 0).unwrap().dim, 0);
    assert_eq!(basis_minus_strictneg(&cat("A2"), &dv(&[1, 1]), 2).unwrap().dim, 2);
    assert_eq!(basis_plus_geq(&a1, &zero, &dv(&[2]), 2).unwrap().dim, 2);
    assert_eq!(basis_plus_geq(&a1, &zero, &dv(&[2]), 1).unwrap().dim, 1);
    assert_eq!(basis_plus_geq(&a1, &SlopeVector::from_integers(&[1]), &dv(&[2]), 2).unwrap().dim, 1);
    assert_eq!(word_span_dim(&a1, &dv(&[2]), 1, &[0]).unwrap(), 1);
    assert_eq!(word_span_dim(&a1, &dv(&[2]), 2, &[0]).unwrap(), 2);
    assert_eq!(word_span_dim(&a1, &dv(&[1]), 5, &[0]).unwrap(), 1);
}

#[test]
fn word_spans_fill_the_nonnegative_slope_space() {
    for name in ["A1", "A2", "B2"] {
        let c = cat(name);
        let bound = if c.rank() == 1 { dv(&[3]) } else { dv(&[2, 2]) };
        let zero = SlopeVector::zero(c.rank());
        for n in bound.patterns_below() {
            for d in 0..4 {
                let span = word_span_dim(&c, &n, d, &vec![0; c.rank()]).unwrap();
                let full = basis_plus_geq(&c, &zero, &n, d).unwrap().dim;
                assert_eq!(span, full, "{name} n={n} d={d}");
            }
        }
    }
}

#[test]
fn early_stopping_preserves_rank() {
    for (name, r) in [("A2", dv(&[2, 1])), ("B2", dv(&[1, 1]))] {
        let c = cat(name);
        for n in dv(&[2, 2]).patterns_below() {
            for d in 1..=r.dot(&n).min(4) {
                let all = gram_for_lr(&c, &r, &n, d, RowPolicy::All, CtOptions::default()).unwrap();
                let early = gram_for_lr(&c, &r, &n, d, RowPolicy::UntilFullRank, CtOptions::default()).unwrap();
                assert!(early.entries.nrows() <= all.entries.nrows());
                assert_eq!(rank_exact(&all.entries), rank_exact(&early.entries), "{name} n={n} d={d}");
            }
        }
    }
}

#[test]
fn quotient_vanishes_beyond_the_shift() {
    let c = cat("A2");
    let r = dv(&[1, 0]);
    for n in dv(&[2, 2]).patterns_below() {
        for d in (r.dot(&n) + 1).max(1)..=4 {
            let g = gram_for_lr(&c, &r, &n, d, RowPolicy::All, CtOptions::default()).unwrap();
            assert_eq!(g.entries.nrows(), 0);
            assert_eq!(lr_dim(&c, &r, &n, d, &RunSettings::default()).unwrap().rank, 0);
        }
    }
}

#[test]
fn refined_character_examples() {
    let c = cat("A1");
    let s = RunSettings::default();
    for r in [0, -2] {
        let chi = chi_refined(&c, &dv(&[r]), &dv(&[3]), 4, &s).unwrap();
        assert_eq!(chi.records().len(), 1);
        assert_eq!(chi.get(&dv(&[0]), 0), 1);
    }
    let chi = chi_refined(&c, &dv(&[2]), &dv(&[3]), 4, &s).unwrap();
    assert_eq!(chi, chi_product(&c, &dv(&[2]), &dv(&[3]), 4, true).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn slope_dims_are_shift_covariant(r0 in -2i64..3, r1 in -2i64..3, n0 in 0i64..3, n1 in 0i64..3, d in 0i64..4) {
        prop_assume!(n0 + n1 > 0);
        let c = cat("A2");
        let n = dv(&[n0, n1]);
        let r = dv(&[r0, r1]);
        let p = SlopeVector::zero(2);
        let base = basis_plus_geq(&c, &p, &n, d).unwrap().dim;
        let shifted = basis_plus_geq(&c, &p.shifted(&r), &n, d + r.dot(&n)).unwrap().dim;
        prop_assert_eq!(base, shifted);
    }
}
