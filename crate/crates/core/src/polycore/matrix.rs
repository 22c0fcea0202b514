//! Sylvester matrices and the two determinant engines: fraction-free Bareiss
//! elimination over exact rings, and elimination over `Z/p^e` with
//! minimal-valuation pivoting.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::sparse::SparsePoly;
use crate::arith::{residue_valuation, Zmod};

/// Integral domain with exact division, enough for Bareiss elimination.
pub trait ExactRing: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn mul_elem(&self, other: &Self) -> Self;
    fn sub_elem(&self, other: &Self) -> Self;
    fn neg_elem(&self) -> Self;
    /// Exact quotient; panics when the division is not exact.
    fn div_exact_elem(&self, other: &Self) -> Self;
    /// Cost heuristic used to prefer cheap pivots.
    fn weight(&self) -> usize {
        1
    }
}

impl ExactRing for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }
    fn one_like(&self) -> Self {
        BigInt::one()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn mul_elem(&self, other: &Self) -> Self {
        self * other
    }
    fn sub_elem(&self, other: &Self) -> Self {
        self - other
    }
    fn neg_elem(&self) -> Self {
        -self
    }
    fn div_exact_elem(&self, other: &Self) -> Self {
        let (q, r) = num_integer::Integer::div_rem(self, other);
        assert!(r.is_zero(), "Bareiss division was not exact");
        q
    }
    fn weight(&self) -> usize {
        self.bits() as usize
    }
}

impl ExactRing for SparsePoly {
    fn zero_like(&self) -> Self {
        SparsePoly::zero(self.vars().clone())
    }
    fn one_like(&self) -> Self {
        SparsePoly::constant(self.vars().clone(), 1)
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn mul_elem(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn sub_elem(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn neg_elem(&self) -> Self {
        self.neg()
    }
    fn div_exact_elem(&self, other: &Self) -> Self {
        self.div_exact(other)
            .expect("Bareiss division was not exact")
    }
    fn weight(&self) -> usize {
        self.len()
    }
}

/// Sylvester matrix of `a` (degree m) and `b` (degree l), coefficients given
/// in descending degree order. The first `l` rows hold shifts of `a`.
pub fn sylvester<R: ExactRing>(a: &[R], b: &[R]) -> Vec<Vec<R>> {
    assert!(!a.is_empty() && !b.is_empty());
    let m = a.len() - 1;
    let l = b.len() - 1;
    let size = m + l;
    let zero = a[0].zero_like();
    let mut rows = vec![vec![zero; size]; size];
    for i in 0..l {
        for (j, c) in a.iter().enumerate() {
            rows[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in b.iter().enumerate() {
            rows[l + i][i + j] = c.clone();
        }
    }
    rows
}

/// Fraction-free (Bareiss) determinant.
pub fn bareiss_det<R: ExactRing>(mut m: Vec<Vec<R>>) -> R {
    let n = m.len();
    assert!(n > 0 && m.iter().all(|r| r.len() == n), "square matrix expected");
    let mut negate = false;
    let mut prev = m[0][0].one_like();
    for k in 0..n - 1 {
        let pivot_row = (k..n)
            .filter(|&i| !m[i][k].is_zero_elem())
            .min_by_key(|&i| m[i][k].weight());
        let Some(pr) = pivot_row else {
            return m[0][0].zero_like();
        };
        if pr != k {
            m.swap(pr, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[k][k].mul_elem(&m[i][j]).sub_elem(&m[i][k].mul_elem(&m[k][j]));
                m[i][j] = t.div_exact_elem(&prev);
            }
            m[i][k] = m[i][k].zero_like();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        det.neg_elem()
    } else {
        det
    }
}

/// Determinant over `Z/p^e` of a row-major `n x n` matrix of residues.
///
/// Each column is pivoted on an entry of minimal valuation, which then
/// divides every entry below it, so plain row operations clear the column.
/// The matrix is consumed as scratch space.
pub fn det_mod_prime_power(mat: &mut [u64], n: usize, ring: &Zmod, p: u64, e: u32) -> u64 {
    debug_assert_eq!(mat.len(), n * n);
    let m = ring.modulus();
    let mut det = 1 % m;
    let mut negate = false;
    let mut total_val = 0u32;
    for k in 0..n {
        let mut best = None;
        let mut best_v = e;
        for i in k..n {
            let x = mat[i * n + k];
            if x != 0 {
                let v = residue_valuation(x, p, e);
                if v < best_v {
                    best_v = v;
                    best = Some(i);
                    if v == 0 {
                        break;
                    }
                }
            }
        }
        let Some(pr) = best else {
            return 0;
        };
        total_val += best_v;
        if total_val >= e {
            return 0;
        }
        if pr != k {
            for j in k..n {
                mat.swap(pr * n + j, k * n + j);
            }
            negate = !negate;
        }
        let pivot = mat[k * n + k];
        det = ring.mul(det, pivot);
        let pv = p.pow(best_v);
        let unit_inv = ring
            .inv(pivot / pv)
            .expect("pivot unit part is invertible");
        for i in k + 1..n {
            let x = mat[i * n + k];
            if x == 0 {
                continue;
            }
            let factor = ring.mul(x / pv, unit_inv);
            mat[i * n + k] = 0;
            for j in k + 1..n {
                let t = ring.mul(factor, mat[k * n + j]);
                mat[i * n + j] = ring.sub(mat[i * n + j], t);
            }
        }
    }
    if negate {
        ring.neg(det)
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn leibniz(m: &[Vec<i64>]) -> i128 {
        let n = m.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = 0i128;
        // Heap's algorithm with sign tracking
        fn rec(k: usize, perm: &mut Vec<usize>, m: &[Vec<i64>], total: &mut i128) {
            if k == 1 {
                let n = perm.len();
                let mut inv = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if perm[i] > perm[j] {
                            inv += 1;
                        }
                    }
                }
                let prod: i128 = (0..n).map(|i| m[i][perm[i]] as i128).product();
                *total += if inv % 2 == 0 { prod } else { -prod };
                return;
            }
            for i in 0..k {
                rec(k - 1, perm, m, total);
                let j = if k % 2 == 0 { i } else { 0 };
                perm.swap(j, k - 1);
            }
        }
        rec(n, &mut perm, m, &mut total);
        total
    }

    proptest! {
        #[test]
        fn bareiss_matches_leibniz(entries in proptest::collection::vec(-9i64..10, 25)) {
            let m: Vec<Vec<i64>> = entries.chunks(5).map(|c| c.to_vec()).collect();
            let big: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            prop_assert_eq!(bareiss_det(big), BigInt::from(leibniz(&m)));
        }

        #[test]
        fn local_det_matches_reduction(entries in proptest::collection::vec(-40i64..40, 16),
                                       pe in prop_oneof![Just((2u64, 6u32)), Just((3, 3)), Just((5, 2)), Just((7, 1))]) {
            let (p, e) = pe;
            let m: Vec<Vec<i64>> = entries.chunks(4).map(|c| c.to_vec()).collect();
            let exact = leibniz(&m);
            let ring = Zmod::new(p.pow(e));
            let mut flat: Vec<u64> = entries.iter().map(|&x| ring.from_i64(x)).collect();
            let got = det_mod_prime_power(&mut flat, 4, &ring, p, e);
            prop_assert_eq!(got as i128, exact.rem_euclid(p.pow(e) as i128));
        }
    }

    #[test]
    fn sylvester_of_linear_factors() {
        let v = SparsePoly::variables(&["a", "b"]);
        let one = SparsePoly::constant(v.clone(), 1);
        let a = SparsePoly::var(v.clone(), 0);
        let b = SparsePoly::var(v.clone(), 1);
        let m = sylvester(&[one.clone(), a.neg()], &[one, b.neg()]);
        assert_eq!(bareiss_det(m), a.sub(&b));
    }
}
