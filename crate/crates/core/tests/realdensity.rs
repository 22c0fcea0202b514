use disclab_core::polycore::{discriminant, MonicIntPoly};
use disclab_core::realdensity::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

fn brute_count(n: usize, h: i64, y: i64) -> u64 {
    let bounds: Vec<i64> = (1..=n as u32).map(|i| h.pow(i)).collect();
    let cap = BigInt::from(h).pow((n * n - n) as u32);
    let mut c: Vec<i64> = bounds.iter().map(|&b| -b).collect();
    let mut count = 0;
    loop {
        let d = discriminant(&MonicIntPoly::from_i64(&c).unwrap());
        if d.abs() * y <= cap {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
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

fn spec(n: usize, h: u64, y: i64) -> BoxSpec {
    BoxSpec::new(n, h, Some(BigRational::from_integer(y.into()))).unwrap()
}

#[test]
fn quadratic_small_disc_count() {
    assert_eq!(enumerate_small_disc(&spec(2, 2, 1), 1 << 30).unwrap(), 13);
    assert_eq!(brute_count(2, 2, 1), 13);
}

#[test]
fn enumeration_matches_brute_force() {
    for (n, h, y) in [(2, 3, 2), (2, 5, 7), (3, 2, 1), (3, 2, 4), (4, 1, 1)] {
        assert_eq!(enumerate_small_disc(&spec(n, h, y), 1 << 30).unwrap(), brute_count(n, h as i64, y), "{:?}", (n, h, y));
    }
}

#[test]
fn quadratic_density_is_quarter_delta() {
    for delta in [0.5, 0.125, 1.0 / 64.0] {
        let e = mc_small_disc_density(2, delta, 400_000, 7).unwrap();
        let tol = e.half_width * 1.5 + 1e-9;
        assert!((e.mean - delta / 4.0).abs() <= tol, "{} vs {}", e.mean, delta / 4.0);
    }
}

#[test]
fn sweep_is_seed_deterministic() {
    let deltas = [0.25, 0.0625];
    let a = mc_density_sweep(3, &deltas, 50_000, 11).unwrap();
    let b = mc_density_sweep(3, &deltas, 50_000, 11).unwrap();
    assert_eq!(a.estimates, b.estimates);
}

#[test]
fn measure_change_constant_one() {
    let r = measure_change_check(2, &TestFn::One, 200_000, 5).unwrap();
    assert!(r.agrees, "{:?}", r);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn dyadic_evaluation_is_exact(m in prop::collection::vec(-(1i64 << 52)..=(1i64 << 52), 2..=4)) {
        let n = m.len();
        let ev = DiscEvaluator::new(n).unwrap();
        let exact = ev.eval_dyadic(&m);
        let c: Vec<f64> = m.iter().map(|&x| x as f64 / (1u64 << 52) as f64).collect();
        let (v, err) = ev.eval_f64(&c);
        // exact is disc * 2^(52 d), d = 2n - 2 the total degree
        let scale = 2f64.powi(52 * (2 * n - 2) as i32);
        let truth = num_traits::ToPrimitive::to_f64(&exact).unwrap() / scale;
        prop_assert!((v - truth).abs() <= err + truth.abs() * 1e-15);
    }
}
