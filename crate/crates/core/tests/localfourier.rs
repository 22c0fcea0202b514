use disclab_core::localfourier::*;
use disclab_core::polycore::{discriminant, MonicIntPoly};
use disclab_core::Limits;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn limits() -> Limits {
    Limits::default()
}

// Points of (Z/p^{2k})^n with p^{2k} | disc, by integer discriminants.
fn brute_support(n: usize, p: u64, k: u32) -> Vec<Vec<i64>> {
    let m = p.pow(2 * k) as i64;
    let total = (m as u64).pow(n as u32);
    let mut out = Vec::new();
    for idx in 0..total {
        let mut t = idx;
        let c: Vec<i64> = (0..n)
            .map(|_| {
                let x = (t % m as u64) as i64;
                t /= m as u64;
                x
            })
            .collect();
        let d = discriminant(&MonicIntPoly::from_i64(&c).unwrap());
        if (d % BigInt::from(m)).is_zero() {
            out.push(c);
        }
    }
    out
}

fn brute_abs(support: &[Vec<i64>], u: &[u64], m: u64, n: usize) -> f64 {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for c in support {
        let j = c.iter().zip(u).map(|(&a, &b)| a as u64 * b).sum::<u64>() % m;
        let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        re += th.cos();
        im += th.sin();
    }
    re.hypot(im) / (m as f64).powi(n as i32)
}

#[test]
fn quadratic_density_mod_nine() {
    let rp = ResidueParams::new(2, 3, 1).unwrap();
    let r = density_exact(rp, &limits(), true).unwrap();
    assert_eq!(r.density(), BigRational::new(1.into(), 9.into()));
    // b^2 - 4c = 0 mod 9 over the 81 classes
    let hand = (0..9i64).flat_map(|b| (0..9i64).map(move |c| (b, c))).filter(|&(b, c)| (b * b - 4 * c).rem_euclid(9) == 0).count();
    assert_eq!(hand, 9);
    assert_eq!(r.oracle_count, Some(9));
}

#[test]
fn transforms_match_direct_summation() {
    for &(n, p, k) in &[(2usize, 2u64, 1u32), (2, 3, 1), (3, 2, 1), (2, 2, 2)] {
        let rp = ResidueParams::new(n, p, k).unwrap();
        let support = brute_support(n, p, k);
        let m = rp.modulus();
        let total = m.pow(n as u32);
        for idx in (0..total).step_by(((total / 40).max(1)) as usize) {
            let mut t = idx;
            let u: Vec<u64> = (0..n)
                .map(|_| {
                    let x = t % m;
                    t /= m;
                    x
                })
                .collect();
            let fast = fourier_fast(rp, &u, &limits(), true).unwrap();
            let exact = fourier_exact(rp, &u, &limits()).unwrap();
            assert_eq!(fast.histogram, exact.histogram, "{:?} {:?}", (n, p, k), u);
            assert_eq!(fast.support_count(), support.len() as u128);
            let want = brute_abs(&support, &u, m, n);
            assert!((fast.magnitude().abs - want).abs() < 1e-9, "{:?} {} vs {}", u, fast.magnitude().abs, want);
            assert_eq!(fast.is_zero(), want < 1e-12);
        }
    }
}

#[test]
fn parseval_small_params() {
    for &(n, p, k) in &[(2usize, 2u64, 1u32), (2, 3, 1), (3, 2, 1)] {
        let rp = ResidueParams::new(n, p, k).unwrap();
        let table = CellTable::build(rp, &limits()).unwrap();
        assert!(parseval_check(&table, &limits()).unwrap().holds);
        let direct = DirectSupport::build(rp, &limits()).unwrap();
        assert!(parseval_check(&direct, &limits()).unwrap().holds);
    }
}

#[test]
fn support_and_valuation_scans_are_clean() {
    let l = limits();
    let rp = ResidueParams::new(3, 2, 1).unwrap();
    let table = CellTable::build(rp, &l).unwrap();
    let r = support_scan(&table, ScanMode::Exhaustive, &l).unwrap();
    assert_eq!(r.violation_count, 0);
    assert_eq!(r.phases_scanned, 64);
    for (n, p, k) in [(2, 3, 1), (3, 2, 2)] {
        let v = valuation_ap_check(ResidueParams::new(n, p, k).unwrap(), &l).unwrap();
        assert_eq!(v.violation_count, 0);
    }
}

#[test]
fn planted_support_violates() {
    let rp = ResidueParams::new(3, 2, 1).unwrap();
    let r = support_scan(&SyntheticSupport::planted(rp), ScanMode::Exhaustive, &limits()).unwrap();
    assert!(r.violation_count > 0);
}

#[test]
fn capacity_errors_are_typed() {
    let rp = ResidueParams::new(6, 3, 3).unwrap();
    let tight = Limits::uniform(8);
    assert!(matches!(density_exact(rp, &tight, false), Err(disclab_core::Error::Capacity { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn conjugate_phase_negates(u in prop::collection::vec(0u64..16, 3)) {
        let rp = ResidueParams::new(3, 2, 2).unwrap();
        let v = fourier_fast(rp, &u, &limits(), false).unwrap();
        let neg: Vec<u64> = u.iter().map(|&x| (16 - x) % 16).collect();
        let w = fourier_fast(rp, &neg, &limits(), false).unwrap();
        prop_assert_eq!(v.conjugate().histogram, w.histogram);
    }

    #[test]
    fn magnitude_never_exceeds_density(u in prop::collection::vec(0u64..16, 2)) {
        let rp = ResidueParams::new(2, 2, 2).unwrap();
        let v = fourier_fast(rp, &u, &limits(), false).unwrap();
        let d = v.as_density().to_f64().unwrap();
        prop_assert!(v.magnitude().abs <= d + 1e-12);
    }

    #[test]
    fn near_ap_accepts_truncated_progressions(a in 0u32..6, d in 0u32..3, k in 1u32..5, len in 1usize..7) {
        let last = len as u32 - 1;
        let a = a.min(k);
        let down: Vec<u32> = (0..=last).map(|i| (a + d * (last - i)).min(k)).collect();
        prop_assert!(is_near_ap(&down, k, 0));
        let up: Vec<u32> = (0..=last).map(|i| (a + d * i).min(k)).collect();
        prop_assert!(is_near_ap(&up, k, d));
    }
}
