use disclab_core::arith::factor_u64;
use disclab_core::polycore::{discriminant_bareiss, MonicIntPoly};
use disclab_core::sievekit::*;
use disclab_core::Limits;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn brute_divisors(m: u64, k: u32, lo: &BigRational, hi: &BigRational) -> Vec<u64> {
    (1..=m)
        .filter(|d| m % d == 0)
        .filter(|&d| factor_u64(d).iter().all(|&(_, e)| e >= k))
        .filter(|&d| {
            let r = BigRational::from_integer(d.into());
            &r >= lo && &r <= hi
        })
        .collect()
}

#[test]
fn powerful_matches_divisor_scan() {
    for m in 2u64..=3000 {
        for k in [2u32, 3] {
            for x in PowerfulQuery::grid(m, k, 7) {
                let Ok(q) = PowerfulQuery::new(m, k, x.clone()) else { continue };
                let hi = &x * BigRational::from_integer(q.c.into());
                let scan = brute_divisors(m, k, &x, &hi);
                assert_eq!(q.valid_divisors(), scan);
                let d = powerful_divisor(&q).unwrap().d;
                assert!(scan.contains(&d), "m={m} k={k} x={x} d={d}");
                assert_eq!(q.smallest_valid(), scan.first().copied());
            }
        }
    }
}

#[test]
fn powerful_sweep_reports_no_failures() {
    let r = powerful_sweep(10_000, &[2, 3], 16).unwrap();
    assert!(r.failures.is_empty());
    assert_eq!(r.queries, r.valid_pairs * 16);
    assert_eq!(r.radical_power + r.cofactor + r.peeled, r.queries);
}

// Oracle: Bareiss discriminant, full factorisation and the lift definition.
fn oracle_census(n: usize, h: i64, threshold: u64) -> (u64, BTreeMap<u64, (u64, u64)>) {
    let bounds: Vec<i64> = (1..=n as u32).map(|i| h.pow(i)).collect();
    let mut c: Vec<i64> = bounds.iter().map(|&b| -b).collect();
    let mut zero = 0;
    let mut rows: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    let limits = Limits::default();
    loop {
        let f = MonicIntPoly::from_i64(&c).unwrap();
        let d = discriminant_bareiss(&f);
        if d.is_zero() {
            zero += 1;
        } else {
            let sq: Vec<u64> = factor_u64(d.abs().to_u64().unwrap()).into_iter().filter(|&(_, e)| e >= 2).map(|(p, _)| p).collect();
            let verdicts: Vec<(u64, Verdict)> = sq
                .iter()
                .map(|&p| (p, classify_multiple(&f, p, ClassifyMode::Lifts, &limits).unwrap().verdict))
                .collect();
            for mask in 1u32..(1 << sq.len()) {
                let chosen: Vec<&(u64, Verdict)> = verdicts.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| v).collect();
                let m: u64 = chosen.iter().map(|v| v.0).product();
                if m < threshold {
                    continue;
                }
                let e = rows.entry(m).or_default();
                if chosen.iter().all(|v| v.1 == Verdict::Strong) {
                    e.0 += 1;
                }
                if chosen.iter().all(|v| v.1 == Verdict::Weak) {
                    e.1 += 1;
                }
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return (zero, rows);
            }
            if c[i] < bounds[i] {
                c[i] += 1;
                break;
            }
            c[i] = -bounds[i];
            i += 1;
        }
    }
}

#[test]
fn census_matches_per_polynomial_oracle() {
    for (n, h, m) in [(2usize, 3u64, 2u64), (3, 2, 2), (3, 2, 6)] {
        let r = sieve_census(n, h, m, &Limits::default()).unwrap();
        let (zero, rows) = oracle_census(n, h as i64, m);
        assert_eq!(r.zero_disc, zero);
        assert_eq!(r.unclassified, 0);
        let got: BTreeMap<u64, (u64, u64)> = r
            .rows
            .iter()
            .filter(|row| row.strong_count + row.weak_count > 0)
            .map(|row| (row.m.to_u64().unwrap(), (row.strong_count, row.weak_count)))
            .collect();
        let want: BTreeMap<u64, (u64, u64)> = rows.into_iter().filter(|(_, v)| v.0 + v.1 > 0).collect();
        assert_eq!(got, want, "{:?}", (n, h, m));
        assert!(r.inclusion_holds);
    }
}

#[test]
fn census_rejects_oversized_box() {
    let tight = Limits { box_budget: 100, ..Limits::default() };
    assert!(matches!(sieve_census(3, 3, 2, &tight), Err(disclab_core::Error::Capacity { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn classifier_modes_agree(c in prop::collection::vec(-60i64..=60, 2..=4), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let f = MonicIntPoly::from_i64(&c).unwrap();
        let l = Limits::default();
        let a = classify_multiple(&f, p, ClassifyMode::Gradient, &l).unwrap();
        let b = classify_multiple(&f, p, ClassifyMode::Lifts, &l).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn square_members_are_never_not_multiple(c in prop::collection::vec(-30i64..=30, 2..=4)) {
        let f = MonicIntPoly::from_i64(&c).unwrap();
        let d = discriminant_bareiss(&f);
        prop_assume!(!d.is_zero());
        for (p, e) in factor_u64(d.abs().to_u64().unwrap()) {
            if e >= 2 {
                let v = classify_multiple(&f, p, ClassifyMode::Gradient, &Limits::default()).unwrap().verdict;
                prop_assert_ne!(v, Verdict::NotMultiple);
            }
        }
    }

    #[test]
    fn square_primes_recover_square_factors(a in 1u64..2000, p in prop::sample::select(vec![2u64, 3, 7, 10_007, 65_537])) {
        let x = BigInt::from(a) * BigInt::from(p) * BigInt::from(p);
        let trial = disclab_core::arith::primes_up_to(TRIAL_BOUND);
        let s = square_primes(&x, &trial);
        prop_assert!(s.primes.contains(&p));
        prop_assert!(s.unresolved.is_none());
    }
}
