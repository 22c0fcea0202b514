use disclab_core::symrel::*;

#[test]
fn relations_hold_on_random_polynomials() {
    for n in 3..=6 {
        let r = check_pair_relation(n, 300, 20, 99).unwrap();
        assert!(r.passed(), "n={n}: {:?}", r.pair_divisibility_failures.first());
        assert!(r.pair_checks > 0);
    }
}

#[test]
fn alpha_routes_agree() {
    for n in 2..=9 {
        assert_eq!(alpha_formula(n), alpha_binomial_sum(n), "n={n}");
    }
}

#[test]
fn cubic_resultant_structure() {
    let r = resultant_structure(3).unwrap();
    assert!(r.passed());
    assert_eq!(r.g2_cn_degree, Some(3));
}
